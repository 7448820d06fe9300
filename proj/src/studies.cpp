#include "burgerslab/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "burgerslab/colehopf.hpp"
#include "burgerslab/error.hpp"
#include "burgerslab/fk.hpp"
#include "burgerslab/heat.hpp"
#include "burgerslab/noise.hpp"
#include "burgerslab/parallel.hpp"
#include "burgerslab/random.hpp"
#include "burgerslab/stats.hpp"
#include "burgerslab/test_function.hpp"

namespace burgerslab {

using nlohmann::ordered_json;

namespace {

// Amplitude of the single Fourier mode used by the linear heat oracles.
constexpr double kModeAmplitude = 0.5;

// Independent realizations behind the ensemble view of the limit pairing.
constexpr std::size_t kLimitEnsemble = 64;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

StudyReport start_report(const ExperimentConfig& cfg) {
  StudyReport rep;
  rep.study = to_string(cfg.study);
  rep.config = cfg.to_json();
  return rep;
}

void add(StudyReport& rep, CheckItem item, const Stopwatch& sw) {
  item.seconds = sw.seconds();
  rep.items.push_back(std::move(item));
}

std::string fmt(double v) { return format_number(v); }

std::string describe_orders(std::span<const double> h, std::span<const double> e) {
  std::ostringstream os;
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? ", " : "") << "(" << h[i] << ", " << e[i] << ")";
  return os.str();
}

// Order fit that reports NaN instead of throwing when a gap is not positive.
double safe_order(std::span<const double> h, std::span<const double> gaps) {
  try {
    return measure_order(h, gaps);
  } catch (const LabError&) {
    return std::nan("");
  }
}

std::shared_ptr<const MollifiedNoise> make_mollified(std::shared_ptr<const WhiteNoiseRealization> base,
                                                     const Mollifier& m) {
  return std::make_shared<const MollifiedNoise>(mollify(std::move(base), m));
}

// Smooth single-mode data Z0 = 1 + a cos(2 pi x_0 / L) and its exact
// evolution under the heat equation.
struct ModeOracle {
  double a;
  double k;

  double z(double t, const Point& x) const { return 1.0 + a * std::exp(-k * k * t) * std::cos(k * x[0]); }
  double u0(double t, const Point& x) const {
    const double g = a * std::exp(-k * k * t);
    return -g * k * std::sin(k * x[0]) / (1.0 + g * std::cos(k * x[0]));
  }
};

// ---------------------------------------------------------------- noise-check

void check_lattice_duality(StudyReport& rep, const ExperimentConfig& cfg) {
  Stopwatch sw;
  double worst_duality = 0.0, worst_self_adjoint = 0.0;
  for (int d : {1, 2}) {
    const TorusGrid g = TorusGrid::make(d, d == 1 ? 64 : 16, 2, 1.0);
    for (int p = 0; p < 100; ++p) {
      NormalSource normal(Stream::test_data, cfg.seed, static_cast<std::uint64_t>(1000 * d + p));
      ScalarField u(g), w(g);
      VectorField v(g);
      for (double& x : u.values) x = normal();
      for (double& x : w.values) x = normal();
      for (double& x : v.values) x = normal();
      const VectorField gu = gradient(u);
      const double lhs = inner_space(gu, v);
      const double rhs = inner_space(u, divergence(v));
      worst_duality = std::max(worst_duality, std::abs(lhs + rhs) / std::sqrt(inner_space(gu, gu) * inner_space(v, v)));
      const ScalarField lu = laplacian(u), lw = laplacian(w);
      const double a = inner_space(lu, w), b = inner_space(u, lw);
      worst_self_adjoint =
          std::max(worst_self_adjoint, std::abs(a - b) / std::sqrt(inner_space(lu, lu) * inner_space(w, w)));
    }
  }
  add(rep, check_at_most("lattice.duality_rel", 1, worst_duality, cfg.tol.duality_rel,
                         "max over 100 random pairs, d=1 (N=64) and d=2 (N=16)"),
      sw);
  add(rep, check_at_most("lattice.laplacian_self_adjoint_rel", 1, worst_self_adjoint, cfg.tol.duality_rel), sw);
  rep.data["duality_rel"] = worst_duality;
  rep.data["laplacian_self_adjoint_rel"] = worst_self_adjoint;
}

void check_mollifier_laws(StudyReport& rep, const ExperimentConfig& cfg) {
  const TorusGrid g = cfg.grid();
  ordered_json rows = ordered_json::array();
  for (int n : cfg.n) {
    Stopwatch sw;
    const Mollifier m = Mollifier::bump(g, n);
    const double mass = mass_quadrature(m);
    const double h0 = h_eval(m, Point{0.0, 0.0, 0.0});
    const double h0_rel = std::abs(h0 - m.c_n_continuum()) / m.c_n_continuum();
    const Point z{0.37 / n, 0.21 / n, -0.11 / n};
    const Point minus_z{-z[0], -z[1], -z[2]};
    const bool symmetric = h_eval(m, z) == h_eval(m, minus_z);
    const bool support = h_eval(m, Point{2.0 / n, 0.0, 0.0}) == 0.0 && h_eval(m, Point{2.5 / n, 0.0, 0.0}) == 0.0 &&
                         (g.d == 1 || h_eval(m, Point{1.5 / n, 1.5 / n, 0.0}) == 0.0) && h_eval(m, Point{1.9 / n, 0.0, 0.0}) > 0.0;
    const std::string tag = "mollifier[n=" + std::to_string(n) + "]";
    add(rep, check_at_most(tag + ".mass_error", 2, std::abs(mass - 1.0), cfg.tol.mollifier_mass_abs), sw);
    add(rep, check_at_most(tag + ".h0_rel", 2, h0_rel, cfg.tol.h0_rel), sw);
    add(rep, check_true(tag + ".h_symmetric", 2, symmetric, "h(z) == h(-z) bitwise"), sw);
    add(rep, check_true(tag + ".h_support", 2, support, "h = 0 exactly for |z| >= 2/n, > 0 inside"), sw);
    rows.push_back({{"n", n},
                    {"mass", mass},
                    {"grid_mass", m.grid_mass()},
                    {"h0", h0},
                    {"c_n_continuum", m.c_n_continuum()},
                    {"c_n_discrete", m.c_n_discrete()}});
  }
  rep.data["mollifiers"] = rows;
}

void check_noise_laws(StudyReport& rep, const ExperimentConfig& cfg) {
  Stopwatch sw;
  const TorusGrid g = cfg.grid();
  const std::size_t nodes = g.nodes();
  const std::size_t samples = nodes * g.M;
  const Mollifier m = Mollifier::bump(g, cfg.n.front());
  const double lambda2 = cfg.lambda * cfg.lambda;

  // Test integrands: a smooth xi, and two with disjoint supports.
  std::vector<double> xi(samples), xi_left(samples), xi_right(samples);
  for (int k = 0; k < g.M; ++k)
    for (std::size_t i = 0; i < nodes; ++i) {
      const Point x = g.position(i);
      const double t = g.time(k);
      const double smooth = std::cos(2.0 * std::numbers::pi * x[0] / g.L) * (1.0 + t / g.T) +
                            0.5 * std::sin(4.0 * std::numbers::pi * x[g.d - 1] / g.L);
      const std::size_t j = static_cast<std::size_t>(k) * nodes + i;
      xi[j] = smooth;
      const bool left = g.coords(i)[0] < g.N / 2;
      xi_left[j] = left ? 1.0 + 0.3 * smooth : 0.0;
      xi_right[j] = left ? 0.0 : 1.0 - 0.3 * smooth;
    }
  double sum_sq = 0.0;
  for (double v : xi) sum_sq += v * v;
  const double expected_pair_var = lambda2 * g.dt() * g.cell_volume() * sum_sq;
  const double expected_inc_var = lambda2 * g.dt() / g.cell_volume();

  const int support_cells = static_cast<int>(std::floor(2.0 * m.support_radius() / g.dx()));
  std::vector<int> lags;
  for (int j = 0; j < 5; ++j) lags.push_back(static_cast<int>(std::lround(j * support_cells / 5.0)));

  const std::size_t S = static_cast<std::size_t>(cfg.ensemble);
  std::vector<double> means(S), first_inc(S), pairs(S), left(S), right(S), origin(S), next_step(S);
  std::vector<std::vector<double>> lagged(lags.size(), std::vector<double>(S));
  parallel_for(S, cfg.threads, [&](std::size_t s) {
    const WhiteNoiseRealization noise = sample_noise(g, cfg.seed + 1 + s, cfg.lambda);
    means[s] = pairwise_sum(noise.increments) / static_cast<double>(samples);
    first_inc[s] = noise.increments[0];
    pairs[s] = pair(noise, xi);
    left[s] = pair(noise, xi_left);
    right[s] = pair(noise, xi_right);
    const std::vector<double> slice0 = convolve(noise.slice(0), m);
    const std::vector<double> slice1 = convolve(noise.slice(1), m);
    origin[s] = slice0[0];
    next_step[s] = slice1[0];
    for (std::size_t l = 0; l < lags.size(); ++l) lagged[l][s] = slice0[g.neighbor(0, 0, lags[l])];
  });

  const double sem = cfg.tol.stderr_multiplier;
  const SampleMoments mean_stats = sample_moments(means);
  add(rep, check_at_most("noise.mean_z", 3, std::abs(mean_stats.mean) / mean_stats.stderr_mean, sem,
                         "|mean of increments| / standard error"),
      sw);
  const SampleMoments inc_stats = sample_moments(first_inc);
  add(rep, check_at_most("noise.increment_variance_rel", 3, std::abs(inc_stats.variance / expected_inc_var - 1.0),
                         cfg.tol.variance_rel, "expected dt/dx^d = " + fmt(expected_inc_var)),
      sw);
  const SampleMoments pair_stats = sample_moments(pairs);
  add(rep, check_at_most("noise.pair_variance_rel", 3, std::abs(pair_stats.variance / expected_pair_var - 1.0),
                         cfg.tol.variance_rel, "expected dt dx^d sum xi^2 = " + fmt(expected_pair_var)),
      sw);
  const CovarianceEstimate disjoint = sample_covariance(left, right);
  add(rep, check_at_most("noise.disjoint_correlation", 3, std::abs(disjoint.correlation),
                         sem / std::sqrt(static_cast<double>(S))),
      sw);

  ordered_json lag_rows = ordered_json::array();
  for (std::size_t l = 0; l < lags.size(); ++l) {
    const CovarianceEstimate c = sample_covariance(origin, lagged[l]);
    const double expected = lambda2 * g.dt() * h_eval(m, Point{lags[l] * g.dx(), 0.0, 0.0});
    const double z = std::abs(c.covariance - expected) / c.stderr_cov;
    add(rep, check_at_most("noise.lag_covariance_z[lag=" + std::to_string(lags[l]) + "]", 3, z, sem,
                           "sample " + fmt(c.covariance) + " vs dt h_n = " + fmt(expected)),
        sw);
    lag_rows.push_back({{"lag_cells", lags[l]}, {"sample_cov", c.covariance}, {"stderr", c.stderr_cov},
                        {"expected", expected}});
  }
  const CovarianceEstimate in_time = sample_covariance(origin, next_step);
  add(rep, check_at_most("noise.time_lag_covariance_z", 3, std::abs(in_time.covariance) / in_time.stderr_cov, sem), sw);

  rep.data["ensemble"] = cfg.ensemble;
  rep.data["pair_variance"] = {{"sample", pair_stats.variance}, {"expected", expected_pair_var}};
  rep.data["increment_variance"] = {{"sample", inc_stats.variance}, {"expected", expected_inc_var}};
  rep.data["lag_covariance"] = lag_rows;

  Table table{"lag_covariance.csv", {"lag_cells", "sample_cov", "stderr", "expected"}, {}};
  for (const auto& row : lag_rows)
    table.add_row({std::to_string(row["lag_cells"].get<int>()), fmt(row["sample_cov"].get<double>()),
                   fmt(row["stderr"].get<double>()), fmt(row["expected"].get<double>())});
  rep.tables.push_back(table);
}

// ----------------------------------------------------------------- qv

StudyReport qv_impl(const ExperimentConfig& cfg) {
  StudyReport rep = start_report(cfg);
  {
    Stopwatch sw;
    const TorusGrid g = cfg.grid();
    auto base = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, cfg.seed, cfg.lambda));
    const MollifiedNoise mn = mollify(base, Mollifier::bump(g, cfg.n.front()));
    const std::vector<double> path = wiener_path(mn, std::size_t{0});
    const double qv_rate = quadratic_variation(path) / g.T;
    const double expected = mn.compensator_rate();
    add(rep, check_at_most("qv.rate_rel", 4, std::abs(qv_rate / expected - 1.0), cfg.tol.qv_rel,
                           "QV/T = " + fmt(qv_rate) + " vs lambda^2 c_n_discrete = " + fmt(expected)),
        sw);
    rep.data["qv_rate"] = qv_rate;
    rep.data["c_n_discrete"] = mn.mollifier.c_n_discrete();
    rep.data["c_n_continuum"] = mn.mollifier.c_n_continuum();
  }
  {
    Stopwatch sw;
    std::vector<double> h, err;
    Table table{"c_n_convergence.csv", {"N", "dx", "c_n_discrete", "c_n_continuum", "rel_error"}, {}};
    for (int level = cfg.levels - 1; level >= 0; --level) {
      const int N = cfg.N >> level;
      const TorusGrid g = TorusGrid::make(cfg.d, N, cfg.M, cfg.T, cfg.L);
      const Mollifier m = Mollifier::bump(g, cfg.n.front());
      const double e = std::abs(m.c_n_discrete() - m.c_n_continuum()) / m.c_n_continuum();
      h.push_back(g.dx());
      err.push_back(e);
      table.add_row({std::to_string(N), fmt(g.dx()), fmt(m.c_n_discrete()), fmt(m.c_n_continuum()), fmt(e)});
    }
    const double order = safe_order(h, err);
    add(rep, check_within("qv.c_n_order", 4, order, cfg.tol.c_n_order - cfg.tol.c_n_order_band,
                          cfg.tol.c_n_order + cfg.tol.c_n_order_band, "(dx, rel error): " + describe_orders(h, err)),
        sw);
    rep.data["c_n_order"] = order;
    rep.tables.push_back(table);
    rep.plots.push_back({"c_n_convergence.svg", "c_n discrete vs continuum", "dx", "relative error", true,
                         {{"c_n", h, err}}});
  }
  return rep;
}

// ----------------------------------------------------------------- heat

StudyReport heat_impl(const ExperimentConfig& cfg) {
  StudyReport rep = start_report(cfg);
  const double k = 2.0 * std::numbers::pi / cfg.L;
  const ModeOracle oracle{kModeAmplitude, k};
  const double a = kModeAmplitude;
  // Taylor-remainder constants: eigenvalue error k^4 dx^2 / 12, Euler error
  // k^4 t dt / 2, propagated through log and the centred gradient.
  const double c_z = a * cfg.T * std::pow(k, 4);
  const double c_u = k * c_z / ((1.0 - a) * (1.0 - a)) + std::pow(k, 3) * a / std::pow(1.0 - a, 3);

  std::vector<double> h, err_z, err_u;
  Table table{"heat_oracle.csv", {"N", "M", "dx", "dt", "max_err_Z", "max_err_U", "bound_Z", "bound_U"}, {}};
  for (int level = cfg.levels - 1; level >= 0; --level) {
    Stopwatch sw;
    const int N = cfg.N >> level;
    const int M = cfg.M / (1 << (2 * level));
    const TorusGrid g = TorusGrid::make(cfg.d, N, M, cfg.T, cfg.L);
    auto base = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, cfg.seed, 0.0));
    auto mn = make_mollified(base, Mollifier::bump(g, cfg.n.front()));
    const ScalarField z0 = ScalarField::sample(g, [&](const Point& x) { return oracle.z(0.0, x); });
    auto sol = std::make_shared<const HeatSolution>(solve_heat_from(mn, z0));
    const ColeHopfTrajectory traj = cole_hopf(sol);
    double ez = 0.0, eu = 0.0;
    for (int step = 0; step <= M; ++step) {
      const double t = g.time(step);
      for (std::size_t i = 0; i < g.nodes(); ++i) {
        const Point x = g.position(i);
        ez = std::max(ez, std::abs(sol->trajectory[step][i] - oracle.z(t, x)));
        eu = std::max(eu, std::abs(traj.U[step].at(i, 0) - oracle.u0(t, x)));
        for (int c = 1; c < g.d; ++c) eu = std::max(eu, std::abs(traj.U[step].at(i, c)));
      }
    }
    const double scale = g.dt() + g.dx() * g.dx();
    const std::string tag = "heat[N=" + std::to_string(N) + "]";
    add(rep, check_at_most(tag + ".max_err_Z", 5, ez, c_z * scale, "C_Z (dt + dx^2), C_Z = " + fmt(c_z)), sw);
    add(rep, check_at_most(tag + ".max_err_U", 5, eu, c_u * scale, "C_U (dt + dx^2), C_U = " + fmt(c_u)), sw);
    h.push_back(g.dx());
    err_z.push_back(ez);
    err_u.push_back(eu);
    table.add_row({std::to_string(N), std::to_string(M), fmt(g.dx()), fmt(g.dt()), fmt(ez), fmt(eu),
                   fmt(c_z * scale), fmt(c_u * scale)});
  }
  Stopwatch sw;
  const double lo = cfg.tol.heat_order - cfg.tol.heat_order_band;
  const double hi = cfg.tol.heat_order + cfg.tol.heat_order_band;
  const double order_z = safe_order(h, err_z);
  const double order_u = safe_order(h, err_u);
  add(rep, check_within("heat.order_Z", 5, order_z, lo, hi, describe_orders(h, err_z)), sw);
  add(rep, check_within("heat.order_U", 5, order_u, lo, hi, describe_orders(h, err_u)), sw);
  rep.data["order_Z"] = order_z;
  rep.data["order_U"] = order_u;
  rep.tables.push_back(table);
  rep.plots.push_back({"heat_oracle.svg", "single-mode oracle error", "dx", "max error", true,
                       {{"Z", h, err_z}, {"U", h, err_u}}});

  // Positivity and zero-noise reduction on the configured grid.
  {
    Stopwatch sw2;
    const TorusGrid g = cfg.grid();
    auto base = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, cfg.seed, cfg.lambda));
    auto mn = make_mollified(base, Mollifier::bump(g, cfg.n.front()));
    const HeatSolution sol = solve_heat(mn, cfg.f);
    double min_z = std::numeric_limits<double>::infinity();
    for (const ScalarField& z : sol.trajectory)
      for (double v : z.values) min_z = std::min(min_z, v);
    add(rep, check_true("heat.positivity", 0, min_z > 0.0, "min Z = " + fmt(min_z)), sw2);

    auto zero = make_mollified(std::make_shared<const WhiteNoiseRealization>(sample_noise(g, cfg.seed, 0.0)),
                               Mollifier::bump(g, cfg.n.front()));
    const HeatSolution quiet = solve_heat(zero, cfg.f);
    ScalarField z = sol.trajectory.front();
    double diff = 0.0;
    for (int step = 0; step < g.M; ++step) {
      const ScalarField lap = laplacian(z);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += g.dt() * lap[i];
      diff = std::max(diff, max_abs_diff(z, quiet.trajectory[step + 1]));
    }
    add(rep, check_at_most("heat.zero_noise_reduction", 0, diff, 0.0, "lambda=0 vs plain explicit heat steps"), sw2);
    rep.data["min_Z"] = min_z;
  }
  return rep;
}

// ----------------------------------------------------------------- burgers

// A sequence that vanishes identically at every level needs no rate.
CheckItem order_check(std::string name, int criterion, double order, std::span<const double> gaps, double min_order,
                      std::string detail) {
  if (std::all_of(gaps.begin(), gaps.end(), [](double g) { return g == 0.0; }))
    return check_true(std::move(name), criterion, true, "identically zero at every level");
  return check_at_least(std::move(name), criterion, order, min_order, std::move(detail));
}

struct LevelResult {
  TorusGrid grid;
  double kpz_sum = 0.0;
  std::vector<WeakResidualReport> weak;
};

StudyReport burgers_impl(const ExperimentConfig& cfg) {
  StudyReport rep = start_report(cfg);
  const TorusGrid master_grid = cfg.grid();
  const int n = cfg.n.front();
  auto master = std::make_shared<const WhiteNoiseRealization>(sample_noise(master_grid, cfg.seed, cfg.lambda));

  std::vector<LevelResult> levels;
  for (int level = 0; level < cfg.levels; ++level) {
    auto base = level == 0 ? master
                           : std::make_shared<const WhiteNoiseRealization>(
                                 coarse_grain(*master, 1 << level, 1 << (2 * level)));
    const TorusGrid& g = base->grid;
    const std::vector<TestFunction> bank = build_bank(cfg.bank, g);
    auto mn = make_mollified(base, Mollifier::bump(g, n));
    ColeHopfTrajectory traj = cole_hopf(std::make_shared<const HeatSolution>(solve_heat(mn, cfg.f)));
    traj.source.reset();
    LevelResult r;
    r.grid = g;
    const std::vector<double> kpz = kpz_residual(traj, *mn);
    r.kpz_sum = pairwise_sum(kpz);
    for (const TestFunction& phi : bank) r.weak.push_back(weak_residual(traj, phi, *mn, *base));
    levels.push_back(std::move(r));
  }
  const LevelResult& finest = levels.front();

  Table weak_table{"weak_residual.csv",
                   {"d", "N", "M", "n", "seed", "lambda", "phi_id", "lhs", "rhs", "gap", "limit_pairing"},
                   {}};
  Table kpz_table{"kpz_residual.csv", {"N", "M", "dt", "kpz_sum"}, {}};
  for (const LevelResult& r : levels) {
    kpz_table.add_row({std::to_string(r.grid.N), std::to_string(r.grid.M), fmt(r.grid.dt()), fmt(r.kpz_sum)});
    for (const WeakResidualReport& w : r.weak)
      weak_table.add_row({std::to_string(w.grid.d), std::to_string(w.grid.N), std::to_string(w.grid.M),
                          std::to_string(w.n), std::to_string(w.seed), fmt(w.lambda), w.phi_id, fmt(w.lhs),
                          fmt(w.rhs), fmt(w.gap), fmt(w.limit_pairing)});
  }

  // Weak identity at the configured (finest) resolution.
  for (const WeakResidualReport& w : finest.weak) {
    Stopwatch sw;
    const double rel = w.rhs != 0.0 ? w.gap / std::abs(w.rhs) : (w.gap == 0.0 ? 0.0 : INFINITY);
    add(rep, check_at_most("weak." + w.phi_id + ".gap_rel", 7, rel, cfg.tol.weak_gap_rel,
                           "lhs=" + fmt(w.lhs) + " rhs=" + fmt(w.rhs)),
        sw);
  }

  ordered_json orders;
  if (levels.size() >= 3) {
    Stopwatch sw;
    std::vector<double> h, kpz;
    for (const LevelResult& r : levels) {
      h.push_back(r.grid.dt());
      kpz.push_back(r.kpz_sum);
    }
    const double kpz_order = safe_order(h, kpz);
    add(rep, order_check("kpz.order", 6, kpz_order, kpz, cfg.tol.min_order, describe_orders(h, kpz)), sw);
    orders["kpz"] = kpz_order;

    Plot gap_plot{"weak_gap.svg", "weak-form gap under coupled refinement", "dt", "gap", true, {}};
    for (std::size_t p = 0; p < finest.weak.size(); ++p) {
      Stopwatch sw2;
      std::vector<double> gaps;
      for (const LevelResult& r : levels) gaps.push_back(r.weak[p].gap);
      const double order = safe_order(h, gaps);
      add(rep, order_check("weak." + finest.weak[p].phi_id + ".gap_order", 7, order, gaps, cfg.tol.min_order,
                           describe_orders(h, gaps)),
          sw2);
      orders["weak." + finest.weak[p].phi_id] = order;
      gap_plot.series.push_back({finest.weak[p].phi_id, h, gaps});
    }
    rep.plots.push_back(gap_plot);
    rep.plots.push_back({"kpz_residual.svg", "summed KPZ residual", "dt", "sum_k max_i |r|", true, {{"kpz", h, kpz}}});
  }

  // Deterministic sanity: no noise and f = 0 give Z = 1 and vanishing residuals.
  {
    Stopwatch sw;
    const TorusGrid& g = levels.back().grid;
    auto base = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, cfg.seed, 0.0));
    auto mn = make_mollified(base, Mollifier::bump(g, n));
    auto sol = std::make_shared<const HeatSolution>(solve_heat(mn, InitialData::zero()));
    const ColeHopfTrajectory traj = cole_hopf(sol);
    const std::vector<double> kpz = kpz_residual(traj, *mn);
    const double worst = *std::max_element(kpz.begin(), kpz.end());
    add(rep, check_at_most("kpz.lambda0_residual", 6, worst, 0.0, "lambda=0, f=0: residual must vanish exactly"), sw);
    double worst_weak = 0.0;
    for (const TestFunction& phi : build_bank(cfg.bank, g)) {
      const WeakResidualReport w = weak_residual(traj, phi, *mn, *base);
      worst_weak = std::max({worst_weak, std::abs(w.lhs), std::abs(w.rhs)});
    }
    add(rep, check_at_most("weak.lambda0_zero", 7, worst_weak, 0.0, "lambda=0, f=0: lhs = rhs = 0"), sw);
  }

  rep.data["orders"] = orders;
  ordered_json level_json = ordered_json::array();
  for (const LevelResult& r : levels) {
    ordered_json weak = ordered_json::array();
    for (const WeakResidualReport& w : r.weak)
      weak.push_back({{"phi_id", w.phi_id}, {"lhs", w.lhs}, {"rhs", w.rhs}, {"gap", w.gap},
                      {"limit_pairing", w.limit_pairing}});
    level_json.push_back({{"N", r.grid.N}, {"M", r.grid.M}, {"dt", r.grid.dt()}, {"kpz_sum", r.kpz_sum},
                          {"weak", weak}});
  }
  rep.data["levels"] = level_json;
  rep.tables.push_back(weak_table);
  rep.tables.push_back(kpz_table);
  return rep;
}

// ----------------------------------------------------------------- converge

StudyReport converge_impl(const ExperimentConfig& cfg) {
  StudyReport rep = start_report(cfg);
  Stopwatch total;
  const TorusGrid g = cfg.grid();
  const std::vector<TestFunction> bank = build_bank(cfg.bank, g);
  auto base = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, cfg.seed, cfg.lambda));

  // rho_n * div(phi) - div(phi) in the discrete space-time L^2 norm, using
  // separability phi = temporal(t) * spatial(x).
  auto mollifier_error = [&](const TestFunction& phi, const Mollifier& m) {
    const ScalarField div = ScalarField::sample(g, [&](const Point& x) { return phi.spatial_divergence(x); });
    const ScalarField smoothed = convolve(div, m);
    double space = 0.0;
    for (std::size_t i = 0; i < div.size(); ++i) space += (smoothed[i] - div[i]) * (smoothed[i] - div[i]);
    double time = 0.0;
    for (int k = 0; k < g.M; ++k) time += phi.temporal(g.time(k)) * phi.temporal(g.time(k));
    return std::sqrt(time * g.dt() * space * g.cell_volume());
  };

  std::vector<int> scales = cfg.n;
  std::sort(scales.begin(), scales.end());
  std::vector<std::unique_ptr<ColeHopfTrajectory>> trajectories;
  std::vector<std::vector<WeakResidualReport>> weak(scales.size());
  std::vector<std::vector<double>> moll_err(scales.size());
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const Mollifier m = Mollifier::bump(g, scales[s]);
    auto mn = make_mollified(base, m);
    auto sol = std::make_shared<const HeatSolution>(solve_heat(mn, cfg.f));
    trajectories.push_back(std::make_unique<ColeHopfTrajectory>(cole_hopf(sol)));
    for (const TestFunction& phi : bank) {
      weak[s].push_back(weak_residual(*trajectories.back(), phi, *mn, *base));
      moll_err[s].push_back(mollifier_error(phi, m));
    }
    // The heat trajectory is no longer needed; keep H and U only.
    trajectories.back()->source.reset();
  }
  // Grid-scale reference: the unmollified discrete equation.
  auto ref_noise = make_mollified(base, Mollifier::grid_delta(g));
  const ColeHopfTrajectory reference =
      cole_hopf(std::make_shared<const HeatSolution>(solve_heat(ref_noise, cfg.f)));

  std::vector<const ColeHopfTrajectory*> ptrs;
  for (const auto& t : trajectories) ptrs.push_back(t.get());

  Table limit_table{"limit_pairing.csv", {"phi_id", "n", "rhs", "limit_pairing", "abs_diff", "mollifier_error", "ratio"}, {}};
  Table dist_table{"distributional_limit.csv", {"phi_id", "n", "pairing", "cauchy_gap"}, {}};
  Plot cauchy_plot{"cauchy_gaps.svg", "Cauchy gaps of <U_n, phi>", "n", "gap", true, {}};
  Plot limit_plot{"limit_pairing.svg", "|rhs(n) - limit pairing|", "n", "abs diff", true, {}};
  ordered_json phi_json = ordered_json::array();
  const double tol_scale = g.dx() * g.dx() + g.dt();

  for (std::size_t p = 0; p < bank.size(); ++p) {
    Stopwatch sw;
    const std::string id = bank[p].id();
    // rhs(n) against the unmollified pairing, tracked by ||rho_n * div phi - div phi||.
    std::vector<double> diffs, ratios, ns;
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const double diff = std::abs(weak[s][p].rhs - weak[s][p].limit_pairing);
      diffs.push_back(diff);
      ratios.push_back(diff / moll_err[s][p]);
      ns.push_back(scales[s]);
      limit_table.add_row({id, std::to_string(scales[s]), fmt(weak[s][p].rhs), fmt(weak[s][p].limit_pairing),
                           fmt(diff), fmt(moll_err[s][p]), fmt(ratios.back())});
    }
    bool non_increasing = true;
    for (std::size_t s = 1; s < diffs.size(); ++s) non_increasing = non_increasing && diffs[s] <= diffs[s - 1];
    const double spread = *std::max_element(ratios.begin(), ratios.end()) /
                          *std::min_element(ratios.begin(), ratios.end());
    add(rep, check_true("limit." + id + ".non_increasing", 8, non_increasing, describe_orders(ns, diffs)), sw);
    add(rep, check_at_most("limit." + id + ".ratio_spread", 8, spread, cfg.tol.limit_ratio_factor,
                           "max/min of |rhs - limit| / ||rho_n * div phi - div phi||"),
        sw);
    limit_plot.series.push_back({id, ns, diffs});

    // Cauchy gaps of <U_n, phi> and the grid-scale reference.
    Stopwatch sw2;
    const DistributionalLimit lim = distributional_limit_1d(ptrs, bank[p]);
    bool decreasing = true;
    for (std::size_t s = 1; s < lim.cauchy_gaps.size(); ++s)
      decreasing = decreasing && lim.cauchy_gaps[s] < lim.cauchy_gaps[s - 1];
    const double ref_value = pair_velocity(reference, bank[p]);
    const double terminal_diff = std::abs(lim.values.back() - ref_value);
    const double scale = std::abs(ref_value);
    add(rep, check_true("dist." + id + ".cauchy_decreasing", 9, decreasing,
                        describe_orders(std::span<const double>(ns).subspan(1), lim.cauchy_gaps)),
        sw2);
    add(rep, check_at_most("dist." + id + ".reference_gap", 9, terminal_diff,
                           cfg.tol.limit_reference_factor * tol_scale * scale,
                           "<U_nmax, phi>=" + fmt(lim.values.back()) + " grid-scale=" + fmt(ref_value)),
        sw2);
    for (std::size_t s = 0; s < scales.size(); ++s)
      dist_table.add_row({id, std::to_string(scales[s]), fmt(lim.values[s]),
                          s == 0 ? std::string() : fmt(lim.cauchy_gaps[s - 1])});
    cauchy_plot.series.push_back({id, std::vector<double>(ns.begin() + 1, ns.end()), lim.cauchy_gaps});
    phi_json.push_back({{"phi_id", id},
                        {"rhs_minus_limit", diffs},
                        {"ratios", ratios},
                        {"pairings", lim.values},
                        {"cauchy_gaps", lim.cauchy_gaps},
                        {"grid_scale_reference", ref_value}});
  }
  // Ensemble view of the same difference: rhs(n) - limit = -<(rho_n * D - D) psi, dW>, whose
  // standard deviation is exactly lambda ||rho_n * div phi - div phi||.
  {
    Stopwatch sw;
    const std::size_t seeds = kLimitEnsemble;
    std::vector<std::vector<double>> weights;  // [phi][n] -> node weights
    for (const TestFunction& phi : bank) {
      const ScalarField div = ScalarField::sample(g, [&](const Point& x) { return phi.spatial_divergence(x); });
      for (int scale : scales) {
        const ScalarField smoothed = convolve(div, Mollifier::bump(g, scale));
        std::vector<double> w(div.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = -(smoothed[i] - div[i]) * g.cell_volume();
        weights.push_back(std::move(w));
      }
    }
    std::vector<std::vector<double>> diffs(weights.size(), std::vector<double>(seeds));
    for (std::size_t s = 0; s < seeds; ++s) {
      const WhiteNoiseRealization noise = sample_noise(g, cfg.seed + 1000 + s, cfg.lambda);
      for (std::size_t p = 0; p < bank.size(); ++p) {
        std::vector<double> acc(g.nodes(), 0.0);
        for (int k = 0; k < g.M; ++k) {
          const double psi_k = bank[p].temporal(g.time(k));
          if (psi_k == 0.0) continue;
          const auto slice = noise.slice(k);
          for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += psi_k * slice[i];
        }
        for (std::size_t s2 = 0; s2 < scales.size(); ++s2) {
          const std::vector<double>& w = weights[p * scales.size() + s2];
          double sum = 0.0;
          for (std::size_t i = 0; i < acc.size(); ++i) sum += w[i] * acc[i];
          diffs[p * scales.size() + s2][s] = sum;
        }
      }
    }
    ordered_json rms_json = ordered_json::array();
    for (std::size_t p = 0; p < bank.size(); ++p)
      for (std::size_t s2 = 0; s2 < scales.size(); ++s2) {
        double ms = 0.0;
        for (double v : diffs[p * scales.size() + s2]) ms += v * v;
        const double rms = std::sqrt(ms / static_cast<double>(seeds));
        const double ratio = rms / (std::abs(cfg.lambda) * moll_err[s2][p]);
        rep.items.push_back(report_only("limit." + bank[p].id() + ".ensemble_rms_ratio[n=" + std::to_string(scales[s2]) +
                                            "]",
                                        8, ratio, std::to_string(seeds) + " seeds; expected 1"));
        rms_json.push_back({{"phi_id", bank[p].id()}, {"n", scales[s2]}, {"rms", rms}, {"ratio", ratio}});
      }
    rep.items.back().seconds = sw.seconds();
    rep.data["ensemble_limit_rms"] = rms_json;
  }

  rep.data["n"] = scales;
  rep.data["phi"] = phi_json;
  rep.tables.push_back(limit_table);
  rep.tables.push_back(dist_table);
  rep.plots.push_back(limit_plot);
  rep.plots.push_back(cauchy_plot);
  return rep;
}

// ----------------------------------------------------------------- section

StudyReport section_impl(const ExperimentConfig& cfg) {
  StudyReport rep = start_report(cfg);
  Stopwatch sw;
  const TorusGrid g = cfg.grid();
  // Off-centre spatial profile; the time factor is unused by the section.
  const TestFunction phi("phi_x", g.d, 0.5 * g.T, 0.4 * g.T, Point{0.3 * g.L, 0.47 * g.L, 0.64 * g.L}, 0.2 * g.L,
                         Point{1.0, 0.5, 0.25}, g.L);
  phi.validate(g.T);
  const int n = cfg.n.front();

  auto trajectory_for = [&](double lambda) {
    auto base = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, cfg.seed, lambda));
    auto mn = make_mollified(base, Mollifier::bump(g, n));
    return cole_hopf(std::make_shared<const HeatSolution>(solve_heat(mn, cfg.f)));
  };
  const ColeHopfTrajectory quiet = trajectory_for(0.0);

  const VectorField spatial = VectorField::sample(g, [&](const Point& x) { return phi.spatial(x); });
  const double reference = inner_space(gradient(cfg.f.sample(g)), spatial);
  const double slope0 = (inner_space(quiet.U[1], spatial) - inner_space(quiet.U[0], spatial)) / g.dt();
  const double constant = 2.0 * std::abs(slope0);

  std::vector<double> eps, err;
  double worst_form_gap = 0.0;
  Table table{"section.csv", {"lambda", "eps", "section", "reference", "abs_error"}, {}};
  for (int j = 0; j < cfg.levels; ++j) {
    const double e = cfg.T / static_cast<double>(8 << j);
    const double s = lojasiewicz_section(quiet, phi, e, SectionForm::divergence);
    const double s_grad = lojasiewicz_section(quiet, phi, e, SectionForm::gradient);
    worst_form_gap = std::max(worst_form_gap, std::abs(s - s_grad) / std::max(std::abs(s), 1e-300));
    eps.push_back(e);
    err.push_back(std::abs(s - reference));
    add(rep, check_at_most("section.lambda0.error[eps=T/" + std::to_string(8 << j) + "]", 10, err.back(),
                           constant * e, "C eps with C = 2 |d/dt <U, phi>| at t=0 = " + fmt(constant)),
        sw);
    table.add_row({"0", fmt(e), fmt(s), fmt(reference), fmt(err.back())});
  }
  const double order = safe_order(eps, err);
  add(rep, check_at_least("section.lambda0.order", 10, order, cfg.tol.min_order, describe_orders(eps, err)), sw);
  add(rep, check_at_most("section.form_agreement", 10, worst_form_gap, 1e-12, "-<H, div phi> vs <U, phi>"), sw);

  const double noisy_lambda = cfg.lambda != 0.0 ? cfg.lambda : 1.0;
  const ColeHopfTrajectory noisy = trajectory_for(noisy_lambda);
  ordered_json noisy_json = ordered_json::array();
  for (double e : eps) {
    const double s = lojasiewicz_section(noisy, phi, e);
    rep.items.push_back(report_only("section.lambda1.value[eps=" + fmt(e) + "]", 10, s,
                                    "reference " + fmt(reference) + "; no tolerance asserted"));
    table.add_row({fmt(noisy_lambda), fmt(e), fmt(s), fmt(reference), fmt(std::abs(s - reference))});
    noisy_json.push_back({{"eps", e}, {"section", s}});
  }
  rep.data["reference"] = reference;
  rep.data["order"] = order;
  rep.data["noisy"] = noisy_json;
  rep.tables.push_back(table);
  rep.plots.push_back({"section.svg", "time section error (lambda = 0)", "eps", "|s(eps) - <grad f, phi>|", true,
                       {{"lambda=0", eps, err}}});
  return rep;
}

// ----------------------------------------------------------------- fk-check

StudyReport fk_impl(const ExperimentConfig& cfg) {
  StudyReport rep = start_report(cfg);
  const TorusGrid g = cfg.grid();
  const int n = cfg.n.front();
  const int d = g.d;
  Table table{"fk.csv", {"t"}, {}};
  for (int a = 0; a < d; ++a) table.columns.push_back("x" + std::to_string(a));
  for (const char* c : {"num_paths", "mode", "mean", "stderr", "solver_value", "z_score"}) table.columns.push_back(c);
  auto add_row = [&](const FkEstimate& e, double solver) {
    std::vector<std::string> row{fmt(e.t)};
    for (int a = 0; a < d; ++a) row.push_back(fmt(e.x[a]));
    const double z = e.stderr_mean > 0.0 ? (e.mean - solver) / e.stderr_mean : (e.mean == solver ? 0.0 : INFINITY);
    row.insert(row.end(), {std::to_string(e.num_paths), to_string(e.mode), fmt(e.mean), fmt(e.stderr_mean),
                           fmt(solver), fmt(z)});
    table.add_row(row);
    return z;
  };
  std::vector<std::size_t> probes;
  for (int p = 0; p < 5; ++p) {
    Coords c{0, 0, 0};
    for (int a = 0; a < d; ++a) c[a] = static_cast<int>((p * g.N) / 5 + g.N / 10 + 3 * a) % g.N;
    probes.push_back(g.index(c));
  }
  FkRequest req;
  req.step = g.M;
  req.num_paths = cfg.num_paths;
  req.path_seed = cfg.seed + 7;
  req.threads = cfg.threads;

  // lambda = 0: heat-kernel Fourier oracle and mode agreement.
  {
    Stopwatch sw;
    auto quiet = make_mollified(std::make_shared<const WhiteNoiseRealization>(sample_noise(g, cfg.seed, 0.0)),
                                Mollifier::bump(g, n));
    const ModeOracle oracle{kModeAmplitude, 2.0 * std::numbers::pi / g.L};
    req.node = probes.front();
    req.first_path = 0;
    const FkPair hook = fk_estimate_modes(*quiet, [&](const Point& y) { return oracle.z(0.0, y); }, req);
    const double exact = oracle.z(g.T, g.position(req.node));
    const double z = std::abs(hook.compensated.mean - exact) / hook.compensated.stderr_mean;
    add(rep, check_at_most("fk.lambda0.mode_oracle_z", 11, z, cfg.tol.fk_z,
                           "MC " + fmt(hook.compensated.mean) + " vs exact " + fmt(exact)),
        sw);
    add_row(hook.compensated, exact);
    req.first_path = static_cast<std::uint64_t>(cfg.num_paths);
    const FkPair both = fk_estimate_modes(*quiet, [&](const Point& y) { return std::exp(cfg.f(y, d)); }, req);
    add(rep, check_true("fk.lambda0.modes_agree", 11,
                        both.compensated.mean == both.uncompensated.mean &&
                            both.compensated.stderr_mean == both.uncompensated.stderr_mean),
        sw);
  }

  // Noisy case: both modes against the finite-difference solver.
  Stopwatch sw;
  const double lambda = cfg.lambda;
  auto base = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, cfg.seed, lambda));
  auto mn = make_mollified(base, Mollifier::bump(g, n));
  const HeatSolution sol = solve_heat(mn, cfg.f);
  const auto density = [&](const Point& y) { return std::exp(cfg.f(y, d)); };
  double worst_comp = 0.0, worst_uncomp = 0.0;
  std::vector<FkPair> estimates;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    req.node = probes[p];
    req.first_path = static_cast<std::uint64_t>(cfg.num_paths) * (2 + p);
    estimates.push_back(fk_estimate_modes(*mn, density, req));
  }
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const double solver = sol.trajectory[g.M][probes[p]];
    worst_comp = std::max(worst_comp, std::abs(add_row(estimates[p].compensated, solver)));
    worst_uncomp = std::max(worst_uncomp, std::abs(add_row(estimates[p].uncompensated, solver)));
  }
  const FkMode calibrated = worst_comp <= worst_uncomp ? FkMode::ito_compensated : FkMode::uncompensated;
  const double worst = std::min(worst_comp, worst_uncomp);
  add(rep, check_at_most("fk.calibrated.max_z", 11, worst, cfg.tol.fk_z,
                         "calibrated mode " + to_string(calibrated) + "; max |z| ito-compensated=" + fmt(worst_comp) +
                             ", uncompensated=" + fmt(worst_uncomp)),
      sw);

  // Standard-error scaling with independent path sets.
  Stopwatch sw2;
  std::vector<double> counts, errors;
  req.node = probes.front();
  std::uint64_t offset = static_cast<std::uint64_t>(cfg.num_paths) * 10;
  for (int paths : {cfg.num_paths / 100, cfg.num_paths / 10, cfg.num_paths}) {
    req.num_paths = std::max(paths, 100);
    req.first_path = offset;
    offset += static_cast<std::uint64_t>(req.num_paths);
    const FkPair e = fk_estimate_modes(*mn, density, req);
    const FkEstimate& chosen = calibrated == FkMode::ito_compensated ? e.compensated : e.uncompensated;
    counts.push_back(req.num_paths);
    errors.push_back(chosen.stderr_mean);
  }
  const double exponent = safe_order(counts, errors);
  add(rep, check_within("fk.stderr_exponent", 11, exponent, cfg.tol.fk_exponent - cfg.tol.fk_exponent_band,
                        cfg.tol.fk_exponent + cfg.tol.fk_exponent_band, describe_orders(counts, errors)),
      sw2);

  rep.data["calibrated_mode"] = to_string(calibrated);
  rep.data["max_z"] = {{"ito-compensated", worst_comp}, {"uncompensated", worst_uncomp}};
  rep.data["stderr_exponent"] = exponent;
  rep.tables.push_back(table);
  rep.plots.push_back({"fk_stderr.svg", "Monte Carlo standard error", "paths", "stderr", true,
                       {{to_string(calibrated), counts, errors}}});
  return rep;
}

}  // namespace

StudyReport run_noise_check(const ExperimentConfig& cfg) {
  StudyReport rep = start_report(cfg);
  check_lattice_duality(rep, cfg);
  check_mollifier_laws(rep, cfg);
  check_noise_laws(rep, cfg);
  return rep;
}

StudyReport run_qv(const ExperimentConfig& cfg) { return qv_impl(cfg); }
StudyReport run_heat(const ExperimentConfig& cfg) { return heat_impl(cfg); }
StudyReport run_burgers(const ExperimentConfig& cfg) { return burgers_impl(cfg); }
StudyReport run_fk_check(const ExperimentConfig& cfg) { return fk_impl(cfg); }
StudyReport run_converge(const ExperimentConfig& cfg) { return converge_impl(cfg); }
StudyReport run_section(const ExperimentConfig& cfg) { return section_impl(cfg); }

StudyReport run_study(const ExperimentConfig& cfg) {
  const std::vector<std::string> problems = validate(cfg);
  if (!problems.empty()) {
    std::string msg;
    for (const std::string& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw LabError(Errc::invalid_config, msg);
  }
  Stopwatch sw;
  StudyReport rep;
  switch (cfg.study) {
    case StudyKind::noise_check: rep = run_noise_check(cfg); break;
    case StudyKind::qv: rep = run_qv(cfg); break;
    case StudyKind::heat: rep = run_heat(cfg); break;
    case StudyKind::burgers: rep = run_burgers(cfg); break;
    case StudyKind::fk_check: rep = run_fk_check(cfg); break;
    case StudyKind::converge: rep = run_converge(cfg); break;
    case StudyKind::section: rep = run_section(cfg); break;
  }
  rep.wall_clock_s = sw.seconds();
  return rep;
}

}  // namespace burgerslab
