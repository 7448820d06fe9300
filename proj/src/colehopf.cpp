#include "burgerslab/colehopf.hpp"

#include <cmath>

#include "burgerslab/error.hpp"

namespace burgerslab {

ColeHopfTrajectory cole_hopf(std::shared_ptr<const HeatSolution> Z) {
  if (!Z) throw LabError(Errc::invalid_argument, "cole_hopf: null heat solution");
  ColeHopfTrajectory out;
  out.grid = Z->grid;
  out.source = Z;
  out.noise = Z->noise;
  out.H.reserve(Z->trajectory.size());
  out.U.reserve(Z->trajectory.size());
  for (std::size_t k = 0; k < Z->trajectory.size(); ++k) {
    const ScalarField& z = Z->trajectory[k];
    ScalarField h(z.grid);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!(z[i] > 0.0))
        throw LabError(Errc::non_positive, "cole_hopf: Z=" + std::to_string(z[i]) + " at step " +
                                               std::to_string(k) + ", node " + std::to_string(i));
      h[i] = std::log(z[i]);
    }
    out.U.push_back(gradient(h));
    out.H.push_back(std::move(h));
  }
  return out;
}

double laplacian_ratio_gap(const ScalarField& Z, const ScalarField& H) {
  const ScalarField lap_z = laplacian(Z);
  const ScalarField lap_h = laplacian(H);
  const VectorField grad_h = gradient(H);
  double gap = 0.0;
  for (std::size_t i = 0; i < Z.size(); ++i)
    gap = std::max(gap, std::abs(lap_z[i] / Z[i] - (lap_h[i] + grad_h.norm_sq(i))));
  return gap;
}

namespace {

void require_matching(const ColeHopfTrajectory& traj, const MollifiedNoise& noise) {
  const MollifiedNoise* own = traj.noise.get();
  const bool same = traj.grid == noise.grid() && own &&
                    (own == &noise || (own->base->seed == noise.base->seed && own->lambda() == noise.lambda() &&
                                       own->mollifier.scale_n() == noise.mollifier.scale_n() &&
                                       own->increments == noise.increments));
  if (!same) throw LabError(Errc::mismatched_realization, "trajectory was not generated from this noise");
}

}  // namespace

std::vector<double> kpz_residual(const ColeHopfTrajectory& traj, const MollifiedNoise& noise) {
  require_matching(traj, noise);
  const TorusGrid& g = traj.grid;
  const double dt = g.dt();
  const double compensator = 0.5 * noise.compensator_rate() * dt;
  std::vector<double> out(g.M, 0.0);
  for (int k = 0; k < g.M; ++k) {
    const ScalarField& h = traj.H[k];
    const ScalarField& next = traj.H[k + 1];
    const ScalarField lap = laplacian(h);
    const VectorField& u = traj.U[k];
    const std::span<const double> dw = noise.slice(k);
    double m = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double r = next[i] - h[i] - dt * (lap[i] + u.norm_sq(i)) - dw[i] + compensator;
      m = std::max(m, std::abs(r));
    }
    out[k] = m;
  }
  return out;
}

namespace {

struct SpatialSamples {
  VectorField value;
  VectorField laplacian;
  ScalarField divergence;
};

SpatialSamples sample_spatial(const TestFunction& phi, const TorusGrid& g) {
  return {VectorField::sample(g, [&](const Point& x) { return phi.spatial(x); }),
          VectorField::sample(g, [&](const Point& x) { return phi.spatial_laplacian(x); }),
          ScalarField::sample(g, [&](const Point& x) { return phi.spatial_divergence(x); })};
}

double slice_dot(std::span<const double> a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

WeakResidualReport weak_residual(const ColeHopfTrajectory& traj, const TestFunction& phi,
                                 const MollifiedNoise& noise, const WhiteNoiseRealization& base) {
  require_matching(traj, noise);
  if (noise.base.get() != &base && !(noise.base->grid == base.grid && noise.base->seed == base.seed &&
                                     noise.base->increments == base.increments))
    throw LabError(Errc::mismatched_realization, "weak_residual: base noise is not the mollified noise's base");
  const TorusGrid& g = traj.grid;
  if (phi.dim() != g.d) throw LabError(Errc::dimension, "weak_residual: test function dimension differs from grid");
  phi.validate(g.T);

  const SpatialSamples s = sample_spatial(phi, g);
  const double dt = g.dt();
  const double vol = g.cell_volume();
  double lhs = 0.0, rhs = 0.0, limit = 0.0;
  for (int k = 0; k < g.M; ++k) {
    const double t = g.time(k);
    const double w = phi.temporal(t);
    const double w_t = phi.temporal_dt(t);
    if (w == 0.0 && w_t == 0.0) continue;
    const VectorField& u = traj.U[k];
    double u_dot_s = 0.0, u_dot_lap = 0.0, energy_div = 0.0;
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      double a = 0.0, b = 0.0;
      for (int c = 0; c < g.d; ++c) {
        a += u.at(i, c) * s.value.at(i, c);
        b += u.at(i, c) * s.laplacian.at(i, c);
      }
      u_dot_s += a;
      u_dot_lap += b;
      energy_div += u.norm_sq(i) * s.divergence[i];
    }
    lhs += dt * vol * (-w_t * u_dot_s - w * u_dot_lap + w * energy_div);
    rhs -= w * vol * slice_dot(noise.slice(k), s.divergence);
    limit -= w * vol * slice_dot(base.slice(k), s.divergence);
  }
  WeakResidualReport r;
  r.phi_id = phi.id();
  r.lhs = lhs;
  r.rhs = rhs;
  r.gap = std::abs(lhs - rhs);
  r.limit_pairing = limit;
  r.n = noise.mollifier.scale_n();
  r.grid = g;
  r.seed = base.seed;
  r.lambda = base.lambda;
  return r;
}

double pair_velocity(const ColeHopfTrajectory& traj, const TestFunction& phi) {
  const TorusGrid& g = traj.grid;
  if (phi.dim() != g.d) throw LabError(Errc::dimension, "pair_velocity: test function dimension differs from grid");
  const VectorField spatial = VectorField::sample(g, [&](const Point& x) { return phi.spatial(x); });
  double total = 0.0;
  for (int k = 0; k < g.M; ++k) {
    const double w = phi.temporal(g.time(k));
    if (w == 0.0) continue;
    total += w * inner_space(traj.U[k], spatial);
  }
  return total * g.dt();
}

DistributionalLimit distributional_limit_1d(std::span<const ColeHopfTrajectory* const> trajectories,
                                            const TestFunction& phi) {
  DistributionalLimit out;
  for (const ColeHopfTrajectory* traj : trajectories) {
    if (traj->grid.d != 1) throw LabError(Errc::dimension, "distributional_limit_1d requires d = 1");
    if (!(traj->grid == trajectories.front()->grid))
      throw LabError(Errc::shape_mismatch, "distributional_limit_1d: trajectories must share one grid");
    out.values.push_back(pair_velocity(*traj, phi));
  }
  for (std::size_t j = 1; j < out.values.size(); ++j)
    out.cauchy_gaps.push_back(std::abs(out.values[j] - out.values[j - 1]));
  return out;
}

double lojasiewicz_section(const ColeHopfTrajectory& traj, const TestFunction& phi, double eps, SectionForm form) {
  const TorusGrid& g = traj.grid;
  if (!(eps > 0.0) || !(2.0 * eps < g.T))
    throw LabError(Errc::invalid_argument, "lojasiewicz_section: need 0 < 2 eps < T, eps=" + std::to_string(eps));
  if (phi.dim() != g.d) throw LabError(Errc::dimension, "lojasiewicz_section: test function dimension differs");
  const VectorField spatial = VectorField::sample(g, [&](const Point& x) { return phi.spatial(x); });
  const ScalarField div = divergence(spatial);
  double s = 0.0;
  for (int k = 0; k <= g.M; ++k) {
    const double w = unit_bump_1d(g.time(k) / eps - 1.0) / eps;
    if (w == 0.0) continue;
    const double paired =
        form == SectionForm::divergence ? -inner_space(traj.H[k], div) : inner_space(traj.U[k], spatial);
    s += w * g.dt() * paired;
  }
  return s;
}

}  // namespace burgerslab
