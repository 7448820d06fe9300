// Command-line front end: burgerslab <study> --config <path> [--seed S] [--out DIR]
#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "burgerslab/config.hpp"
#include "burgerslab/error.hpp"
#include "burgerslab/report.hpp"
#include "burgerslab/studies.hpp"

namespace {

constexpr const char* kOutEnv = "BURGERSLAB_OUT";

void print_summary(const burgerslab::StudyReport& rep, std::ostream& os) {
  for (const auto& item : rep.items) {
    os << (item.relation == "report" ? "INFO " : item.pass ? "PASS " : "FAIL ") << std::left << std::setw(48)
       << item.name << " value=" << burgerslab::format_number(item.value);
    if (item.relation == "<=" || item.relation == "==") os << " <= " << burgerslab::format_number(item.upper);
    else if (item.relation == ">=") os << " >= " << burgerslab::format_number(item.lower);
    else if (item.relation != "report")
      os << " in [" << burgerslab::format_number(item.lower) << ", " << burgerslab::format_number(item.upper) << "]";
    os << "\n";
  }
  os << rep.study << ": " << (rep.passed() ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(2)
     << rep.wall_clock_s << " s)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cole-Hopf lattice laboratory for the stochastic Burgers equation"};
  std::string study;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir;
  bool list = false;

  app.add_option("study", study, "Study kind (see --list-studies)");
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out", out_dir, std::string("Output directory (default: $") + kOutEnv + ", then config)");
  app.add_option("--threads", threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  app.add_flag("--list-studies", list, "Print the available study kinds");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& name : burgerslab::study_names()) std::cout << name << "\n";
    return 0;
  }
  if (study.empty() || config_path.empty()) {
    std::cerr << "error: a study and --config are required\n" << app.help();
    return 2;
  }
  const auto kind = burgerslab::parse_study(study);
  if (!kind) {
    std::cerr << "error: unknown study '" << study << "'; try --list-studies\n";
    return 2;
  }

  try {
    burgerslab::ExperimentConfig cfg = burgerslab::load_config(config_path, kind);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    else if (const char* env = std::getenv(kOutEnv); env && *env) cfg.output_dir = env;
    if (cfg.output_dir.empty()) cfg.output_dir = "out/" + study;

    const burgerslab::StudyReport rep = burgerslab::run_study(cfg);
    print_summary(rep, std::cout);
    for (const auto& path : burgerslab::emit_reports(rep, cfg.output_dir)) std::cout << "wrote " << path.string() << "\n";
    return rep.passed() ? 0 : 1;
  } catch (const burgerslab::LabError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
