#pragma once

#include "burgerslab/config.hpp"
#include "burgerslab/report.hpp"

namespace burgerslab {

/// Dispatches to the named study. Deterministic given the config (seed and
/// thread count included); numerical failures are reported as failed items,
/// configuration errors as LabError(invalid_config).
StudyReport run_study(const ExperimentConfig& cfg);

StudyReport run_noise_check(const ExperimentConfig& cfg);
StudyReport run_qv(const ExperimentConfig& cfg);
StudyReport run_heat(const ExperimentConfig& cfg);
StudyReport run_burgers(const ExperimentConfig& cfg);
StudyReport run_fk_check(const ExperimentConfig& cfg);
StudyReport run_converge(const ExperimentConfig& cfg);
StudyReport run_section(const ExperimentConfig& cfg);

}  // namespace burgerslab
