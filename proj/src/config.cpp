#include "burgerslab/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "burgerslab/error.hpp"
#include "burgerslab/noise.hpp"

namespace burgerslab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::vector<std::pair<StudyKind, std::string>>& study_table() {
  static const std::vector<std::pair<StudyKind, std::string>> table{
      {StudyKind::noise_check, "noise-check"}, {StudyKind::qv, "qv"},
      {StudyKind::heat, "heat"},               {StudyKind::burgers, "burgers"},
      {StudyKind::fk_check, "fk-check"},       {StudyKind::converge, "converge"},
      {StudyKind::section, "section"},
  };
  return table;
}

bool uses_heat_solver(StudyKind k) {
  return k == StudyKind::heat || k == StudyKind::burgers || k == StudyKind::fk_check ||
         k == StudyKind::converge || k == StudyKind::section;
}

bool uses_levels(StudyKind k) { return k == StudyKind::heat || k == StudyKind::burgers || k == StudyKind::qv; }

// Per-level (space, time) refinement factor; burgers/heat keep dt proportional to dx^2.
int time_factor_per_level(StudyKind k) { return k == StudyKind::qv ? 1 : 4; }

}  // namespace

std::string to_string(StudyKind kind) {
  for (const auto& [k, name] : study_table())
    if (k == kind) return name;
  return "unknown";
}

std::optional<StudyKind> parse_study(const std::string& name) {
  for (const auto& [k, n] : study_table())
    if (n == name) return k;
  return std::nullopt;
}

std::vector<std::string> study_names() {
  std::vector<std::string> out;
  for (const auto& entry : study_table()) out.push_back(entry.second);
  return out;
}

namespace {

ordered_json initial_data_json(const InitialData& f) {
  ordered_json j;
  switch (f.kind) {
    case InitialData::Kind::zero:
      j["kind"] = "zero";
      break;
    case InitialData::Kind::cosine:
      j["kind"] = "cosine";
      j["a"] = f.amplitude;
      j["k"] = f.wavenumber;
      break;
    case InitialData::Kind::gaussian_bump:
      j["kind"] = "gaussian-bump";
      j["a"] = f.amplitude;
      j["w"] = f.width;
      j["center"] = {f.center[0], f.center[1], f.center[2]};
      break;
  }
  return j;
}

ordered_json tolerances_json(const Tolerances& t) {
  ordered_json j;
  j["duality_rel"] = t.duality_rel;
  j["mollifier_mass_abs"] = t.mollifier_mass_abs;
  j["h0_rel"] = t.h0_rel;
  j["variance_rel"] = t.variance_rel;
  j["stderr_multiplier"] = t.stderr_multiplier;
  j["qv_rel"] = t.qv_rel;
  j["c_n_order"] = t.c_n_order;
  j["c_n_order_band"] = t.c_n_order_band;
  j["heat_order"] = t.heat_order;
  j["heat_order_band"] = t.heat_order_band;
  j["min_order"] = t.min_order;
  j["weak_gap_rel"] = t.weak_gap_rel;
  j["limit_ratio_factor"] = t.limit_ratio_factor;
  j["limit_reference_factor"] = t.limit_reference_factor;
  j["fk_z"] = t.fk_z;
  j["fk_exponent"] = t.fk_exponent;
  j["fk_exponent_band"] = t.fk_exponent_band;
  return j;
}

std::map<std::string, double Tolerances::*> tolerance_fields() {
  return {
      {"duality_rel", &Tolerances::duality_rel},
      {"mollifier_mass_abs", &Tolerances::mollifier_mass_abs},
      {"h0_rel", &Tolerances::h0_rel},
      {"variance_rel", &Tolerances::variance_rel},
      {"stderr_multiplier", &Tolerances::stderr_multiplier},
      {"qv_rel", &Tolerances::qv_rel},
      {"c_n_order", &Tolerances::c_n_order},
      {"c_n_order_band", &Tolerances::c_n_order_band},
      {"heat_order", &Tolerances::heat_order},
      {"heat_order_band", &Tolerances::heat_order_band},
      {"min_order", &Tolerances::min_order},
      {"weak_gap_rel", &Tolerances::weak_gap_rel},
      {"limit_ratio_factor", &Tolerances::limit_ratio_factor},
      {"limit_reference_factor", &Tolerances::limit_reference_factor},
      {"fk_z", &Tolerances::fk_z},
      {"fk_exponent", &Tolerances::fk_exponent},
      {"fk_exponent_band", &Tolerances::fk_exponent_band},
  };
}

}  // namespace

ordered_json ExperimentConfig::to_json() const {
  ordered_json j;
  j["study"] = to_string(study);
  j["d"] = d;
  j["N"] = N;
  j["M"] = M;
  j["L"] = L;
  j["T"] = T;
  j["n"] = n;
  j["lambda"] = lambda;
  j["seed"] = seed;
  j["f"] = initial_data_json(f);
  if (bank.use_default) {
    j["bank"] = "default";
  } else {
    ordered_json entries = ordered_json::array();
    for (const TestFunctionSpec& e : bank.entries)
      entries.push_back({{"id", e.id},
                         {"t_center", e.t_center},
                         {"t_radius", e.t_radius},
                         {"x_center", e.x_center},
                         {"x_radius", e.x_radius},
                         {"amplitude", {e.amplitude[0], e.amplitude[1], e.amplitude[2]}}});
    j["bank"] = entries;
  }
  j["num_paths"] = num_paths;
  j["levels"] = levels;
  j["ensemble"] = ensemble;
  j["tolerances"] = tolerances_json(tol);
  return j;
}

namespace {

class FieldReader {
 public:
  explicit FieldReader(std::vector<std::string>& errors) : errors_(errors) {}

  template <class T>
  void read(const json& j, const std::string& key, T& out) {
    try {
      out = j.get<T>();
    } catch (const json::exception&) {
      errors_.push_back(key + ": wrong type (" + std::string(j.type_name()) + ")");
    }
  }

  void fail(const std::string& key, const std::string& why) { errors_.push_back(key + ": " + why); }

 private:
  std::vector<std::string>& errors_;
};

Point read_point(const json& j, FieldReader& reader, const std::string& key) {
  Point p{0.0, 0.0, 0.0};
  if (!j.is_array() || j.empty() || j.size() > 3) {
    reader.fail(key, "expected an array of 1..3 numbers");
    return p;
  }
  for (std::size_t i = 0; i < j.size(); ++i) reader.read(j[i], key + "[" + std::to_string(i) + "]", p[i]);
  return p;
}

InitialData read_initial_data(const json& j, FieldReader& reader) {
  if (!j.is_object()) {
    reader.fail("f", "expected an object with a 'kind' field");
    return InitialData::zero();
  }
  std::string kind = "zero";
  double a = 0.0, w = 0.1;
  int k = 1;
  Point center{0.5, 0.5, 0.5};
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") reader.read(value, "f.kind", kind);
    else if (key == "a") reader.read(value, "f.a", a);
    else if (key == "k") reader.read(value, "f.k", k);
    else if (key == "w") reader.read(value, "f.w", w);
    else if (key == "center") center = read_point(value, reader, "f.center");
    else reader.fail("f." + key, "unknown field");
  }
  if (kind == "zero") return InitialData::zero();
  if (kind == "cosine") return InitialData::cosine(a, k);
  if (kind == "gaussian-bump") {
    if (!(w > 0.0)) {
      reader.fail("f.w", "width must be positive");
      return InitialData::zero();
    }
    return InitialData::gaussian_bump(a, w, center);
  }
  reader.fail("f.kind", "unknown preset '" + kind + "' (zero, cosine, gaussian-bump)");
  return InitialData::zero();
}

BankSpec read_bank(const json& j, FieldReader& reader) {
  BankSpec spec;
  if (j.is_string()) {
    if (j.get<std::string>() != "default") reader.fail("bank", "only \"default\" or an explicit array is accepted");
    return spec;
  }
  if (!j.is_array()) {
    reader.fail("bank", "expected \"default\" or an array of test functions");
    return spec;
  }
  spec.use_default = false;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string prefix = "bank[" + std::to_string(i) + "]";
    TestFunctionSpec e;
    e.id = "phi" + std::to_string(i + 1);
    if (!j[i].is_object()) {
      reader.fail(prefix, "expected an object");
      continue;
    }
    for (const auto& [key, value] : j[i].items()) {
      if (key == "id") reader.read(value, prefix + ".id", e.id);
      else if (key == "t_center") reader.read(value, prefix + ".t_center", e.t_center);
      else if (key == "t_radius") reader.read(value, prefix + ".t_radius", e.t_radius);
      else if (key == "x_center") reader.read(value, prefix + ".x_center", e.x_center);
      else if (key == "x_radius") reader.read(value, prefix + ".x_radius", e.x_radius);
      else if (key == "amplitude") e.amplitude = read_point(value, reader, prefix + ".amplitude");
      else reader.fail(prefix + "." + key, "unknown field");
    }
    spec.entries.push_back(e);
  }
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const json& j, std::optional<StudyKind> study_override) {
  std::vector<std::string> errors;
  FieldReader reader(errors);
  ExperimentConfig cfg;
  if (!j.is_object()) throw LabError(Errc::invalid_config, "config root must be a JSON object");

  bool study_seen = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "study") {
      std::string name;
      reader.read(value, key, name);
      if (auto k = parse_study(name)) {
        cfg.study = *k;
        study_seen = true;
      } else if (!name.empty()) {
        reader.fail(key, "unknown study '" + name + "'");
      }
    } else if (key == "d") reader.read(value, key, cfg.d);
    else if (key == "N") reader.read(value, key, cfg.N);
    else if (key == "M") reader.read(value, key, cfg.M);
    else if (key == "L") reader.read(value, key, cfg.L);
    else if (key == "T") reader.read(value, key, cfg.T);
    else if (key == "n") {
      if (value.is_number_integer()) cfg.n = {value.get<int>()};
      else reader.read(value, key, cfg.n);
    } else if (key == "lambda") reader.read(value, key, cfg.lambda);
    else if (key == "seed") reader.read(value, key, cfg.seed);
    else if (key == "f") cfg.f = read_initial_data(value, reader);
    else if (key == "bank") cfg.bank = read_bank(value, reader);
    else if (key == "num_paths") reader.read(value, key, cfg.num_paths);
    else if (key == "levels") reader.read(value, key, cfg.levels);
    else if (key == "ensemble") reader.read(value, key, cfg.ensemble);
    else if (key == "threads") reader.read(value, key, cfg.threads);
    else if (key == "output_dir") reader.read(value, key, cfg.output_dir);
    else if (key == "tolerances") {
      if (!value.is_object()) {
        reader.fail(key, "expected an object");
        continue;
      }
      const auto fields = tolerance_fields();
      for (const auto& [tkey, tvalue] : value.items()) {
        auto it = fields.find(tkey);
        if (it == fields.end()) reader.fail("tolerances." + tkey, "unknown field");
        else reader.read(tvalue, "tolerances." + tkey, cfg.tol.*(it->second));
      }
    } else {
      reader.fail(key, "unknown field");
    }
  }
  if (study_override) cfg.study = *study_override;
  else if (!study_seen) errors.push_back("study: missing (give it in the config or on the command line)");

  if (errors.empty()) {
    const auto semantic = validate(cfg);
    errors.insert(errors.end(), semantic.begin(), semantic.end());
  }
  if (!errors.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < errors.size(); ++i) os << (i ? "; " : "") << errors[i];
    throw LabError(Errc::invalid_config, os.str());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, std::optional<StudyKind> study_override) {
  std::ifstream is(path);
  if (!is) throw LabError(Errc::io, "cannot open config " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw LabError(Errc::invalid_config, path + ": " + e.what());
  }
  return parse_config(j, study_override);
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  auto fail = [&](const std::string& key, const std::string& why) { errors.push_back(key + ": " + why); };

  if (cfg.d < 1 || cfg.d > 3) fail("d", "must be 1, 2 or 3");
  if (cfg.N < 8) fail("N", "must be >= 8");
  if (cfg.M < 2) fail("M", "must be >= 2");
  if (!(cfg.L > 0.0) || !std::isfinite(cfg.L)) fail("L", "must be positive");
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) fail("T", "must be positive");
  if (!std::isfinite(cfg.lambda)) fail("lambda", "must be finite");
  if (cfg.num_paths < 100) fail("num_paths", "must be >= 100");
  if (cfg.ensemble < 100) fail("ensemble", "must be >= 100");
  if (cfg.threads < 1) fail("threads", "must be >= 1");
  if (cfg.levels < 1) fail("levels", "must be >= 1");
  if (cfg.n.empty()) fail("n", "needs at least one mollifier scale");
  for (const auto& [key, member] : tolerance_fields()) {
    const double v = cfg.tol.*member;
    if (!std::isfinite(v) || (key != "fk_exponent" && !(v > 0.0))) fail("tolerances." + key, "must be positive");
  }
  if (!errors.empty()) return errors;

  const StudyKind s = cfg.study;
  const TorusGrid grid = cfg.grid();
  if ((s == StudyKind::noise_check || s == StudyKind::qv) && !(cfg.lambda > 0.0))
    fail("lambda", "statistical studies need lambda > 0");
  if ((s == StudyKind::qv || s == StudyKind::heat || s == StudyKind::section) && cfg.levels < 3)
    fail("levels", "order measurements need at least 3 levels");
  if (s == StudyKind::converge) {
    if (cfg.d != 1) fail("d", "converge studies the 1-D distributional limit and needs d = 1");
    if (cfg.n.size() < 3) fail("n", "converge needs at least 3 mollifier scales");
  }
  if (uses_heat_solver(s) && stability_check(grid) < 0.0)
    fail("M", "stability margin 1 - 2d dt/dx^2 = " + std::to_string(stability_check(grid)) + " < 0");

  // Coarsest grid used by the study; qv refines upwards from it, the others
  // coarse-grain the master realization down to it.
  int coarse_N = cfg.N;
  if (uses_levels(s) && cfg.levels > 1) {
    const int space = 1 << (cfg.levels - 1);
    const long time = static_cast<long>(std::pow(time_factor_per_level(s), cfg.levels - 1));
    if (cfg.N % space != 0 || cfg.N / space < 8)
      fail("levels", "N=" + std::to_string(cfg.N) + " cannot be halved " + std::to_string(cfg.levels - 1) +
                         " times to a grid with >= 8 nodes");
    else
      coarse_N = cfg.N / space;
    if (s != StudyKind::qv && cfg.M % time != 0)
      fail("levels", "M must be divisible by " + std::to_string(time) + " for dt ~ dx^2 coupling");
  }
  for (int n : cfg.n) {
    if (n < 1) {
      fail("n", "mollifier scale must be >= 1");
      continue;
    }
    if (2.0 / n >= cfg.L) fail("n", "support diameter 2/" + std::to_string(n) + " must be < L");
    const double dx = cfg.L / coarse_N;
    if (1.0 / n < 4.0 * dx * (1.0 - 1e-12))
      fail("n", "mollifier n=" + std::to_string(n) + " under-resolved: 1/n < 4 dx on the N=" +
                    std::to_string(coarse_N) + " grid");
  }
  try {
    build_bank(cfg.bank, grid);
  } catch (const LabError& e) {
    fail("bank", e.what());
  }
  return errors;
}

}  // namespace burgerslab
