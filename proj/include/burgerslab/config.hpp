#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "burgerslab/heat.hpp"
#include "burgerslab/lattice.hpp"
#include "burgerslab/test_function.hpp"

namespace burgerslab {

enum class StudyKind { noise_check, qv, heat, burgers, fk_check, converge, section };

std::string to_string(StudyKind kind);
std::optional<StudyKind> parse_study(const std::string& name);
std::vector<std::string> study_names();

/// Pass/fail thresholds; defaults mirror the acceptance criteria.
struct Tolerances {
  double duality_rel = 1e-12;
  double mollifier_mass_abs = 1e-8;
  double h0_rel = 1e-6;
  double variance_rel = 0.05;
  double stderr_multiplier = 4.0;
  double qv_rel = 0.05;
  double c_n_order = 2.0;
  double c_n_order_band = 0.3;
  double heat_order = 2.0;
  double heat_order_band = 0.2;
  double min_order = 0.9;
  double weak_gap_rel = 0.1;
  double limit_ratio_factor = 3.0;
  double limit_reference_factor = 5.0;
  double fk_z = 3.0;
  double fk_exponent = -0.5;
  double fk_exponent_band = 0.1;
};

struct ExperimentConfig {
  StudyKind study = StudyKind::burgers;
  int d = 1;
  int N = 128;
  int M = 32768;
  double L = 1.0;
  double T = 0.1;
  std::vector<int> n{8};
  double lambda = 1.0;
  std::uint64_t seed = 12345;
  InitialData f = InitialData::cosine(0.5, 1);
  BankSpec bank;
  int num_paths = 10000;
  int levels = 3;       // coupled refinement levels (coarse-grained from the master grid)
  int ensemble = 10000; // independent seeds for statistical checks
  int threads = 1;
  std::string output_dir;
  Tolerances tol;

  TorusGrid grid() const { return TorusGrid::make(d, N, M, T, L); }
  nlohmann::ordered_json to_json() const;
};

/// Parses and validates; every problem is reported by field name in one
/// LabError(invalid_config).
ExperimentConfig parse_config(const nlohmann::json& j, std::optional<StudyKind> study_override = std::nullopt);
ExperimentConfig load_config(const std::string& path, std::optional<StudyKind> study_override = std::nullopt);

/// Field-named problems with an already-populated config; empty when valid.
std::vector<std::string> validate(const ExperimentConfig& cfg);

}  // namespace burgerslab
