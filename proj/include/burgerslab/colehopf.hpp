#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "burgerslab/heat.hpp"
#include "burgerslab/lattice.hpp"
#include "burgerslab/noise.hpp"
#include "burgerslab/test_function.hpp"

namespace burgerslab {

/// H = log Z and U = gradient(H) at every time node. `source` may be
/// released to save memory; `noise` identifies the driving realization.
struct ColeHopfTrajectory {
  TorusGrid grid;
  std::vector<ScalarField> H;
  std::vector<VectorField> U;
  std::shared_ptr<const HeatSolution> source;
  std::shared_ptr<const MollifiedNoise> noise;
};

ColeHopfTrajectory cole_hopf(std::shared_ptr<const HeatSolution> Z);

/// max_i | Lap Z / Z - (Lap H + |grad H|^2) | on one time slice.
double laplacian_ratio_gap(const ScalarField& Z, const ScalarField& H);

/// Per-step max-norm of the discrete KPZ residual
///   r_k = H_{k+1} - H_k - dt (Lap H_k + |grad H_k|^2) - dW^n_k + lambda^2 c_n dt / 2.
std::vector<double> kpz_residual(const ColeHopfTrajectory& traj, const MollifiedNoise& noise);

struct WeakResidualReport {
  std::string phi_id;
  double lhs = 0.0;            // <L_B U_n, phi>
  double rhs = 0.0;            // -sum div(phi) dW^n dx^d
  double gap = 0.0;            // |lhs - rhs|
  double limit_pairing = 0.0;  // same pairing against the unmollified increments
  int n = 0;
  TorusGrid grid;
  std::uint64_t seed = 0;
  double lambda = 0.0;
};

WeakResidualReport weak_residual(const ColeHopfTrajectory& traj, const TestFunction& phi,
                                 const MollifiedNoise& noise, const WhiteNoiseRealization& base);

/// <U, phi> over space-time with left-endpoint time weights.
double pair_velocity(const ColeHopfTrajectory& traj, const TestFunction& phi);

struct DistributionalLimit {
  std::vector<double> values;       // <U_n, phi> for each trajectory
  std::vector<double> cauchy_gaps;  // |values[j+1] - values[j]|
};

DistributionalLimit distributional_limit_1d(std::span<const ColeHopfTrajectory* const> trajectories,
                                            const TestFunction& phi);

enum class SectionForm { divergence, gradient };

/// Time section at t = 0 through the delta net rho_eps(t) = rho0(t/eps - 1)/eps,
/// paired in space with the spatial part of phi.
double lojasiewicz_section(const ColeHopfTrajectory& traj, const TestFunction& phi, double eps,
                           SectionForm form = SectionForm::divergence);

}  // namespace burgerslab
