#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "burgerslab/colehopf.hpp"
#include "burgerslab/error.hpp"
#include "burgerslab/stats.hpp"

using namespace burgerslab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Run {
  std::shared_ptr<const WhiteNoiseRealization> base;
  std::shared_ptr<const MollifiedNoise> noise;
  ColeHopfTrajectory traj;
};

Run run(std::shared_ptr<const WhiteNoiseRealization> base, int n, const InitialData& f) {
  Run r;
  r.base = std::move(base);
  r.noise = std::make_shared<const MollifiedNoise>(mollify(r.base, Mollifier::bump(r.base->grid, n)));
  r.traj = cole_hopf(std::make_shared<const HeatSolution>(solve_heat(r.noise, f)));
  return r;
}

Run run(const TorusGrid& g, std::uint64_t seed, double lambda, int n, const InitialData& f) {
  return run(std::make_shared<const WhiteNoiseRealization>(sample_noise(g, seed, lambda)), n, f);
}

TestFunction centred_phi(int d, double T) {
  return TestFunction("phi", d, 0.5 * T, 0.4 * T, Point{0.4, 0.55, 0.6}, 0.25, Point{1.0, -0.5, 0.3});
}

}  // namespace

TEST_CASE("Cole-Hopf of constant and exponential data") {
  const TorusGrid g = TorusGrid::make(2, 16, 256, 0.1);
  const Run one = run(g, 1, 0.0, 4, InitialData::zero());
  for (const ScalarField& h : one.traj.H)
    for (double v : h.values) CHECK(v == 0.0);
  for (const VectorField& u : one.traj.U)
    for (double v : u.values) CHECK(v == 0.0);

  const InitialData f = InitialData::cosine(0.5, 1);
  const Run cos_run = run(g, 1, 1.0, 4, f);
  const ScalarField fs = f.sample(g);
  const VectorField grad = gradient(fs);
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    CHECK(cos_run.traj.H[0][i] == doctest::Approx(fs[i]).epsilon(1e-15));
    for (int a = 0; a < 2; ++a) CHECK(cos_run.traj.U[0].at(i, a) == doctest::Approx(grad.at(i, a)).epsilon(1e-12));
  }
}

TEST_CASE("Cole-Hopf rejects non-positive Z") {
  const TorusGrid g = TorusGrid::make(1, 16, 64, 0.1);
  auto sol = std::make_shared<HeatSolution>();
  sol->grid = g;
  sol->trajectory = {ScalarField(g, 1.0), ScalarField(g, 1.0)};
  sol->trajectory[1][3] = -1e-3;
  try {
    cole_hopf(sol);
    FAIL("expected non-positive error");
  } catch (const LabError& e) {
    CHECK(e.code() == Errc::non_positive);
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}

TEST_CASE("deterministic velocity matches the viscous Burgers solution") {
  const double a = 0.5;
  std::vector<double> h, err;
  for (int N : {32, 64, 128}) {
    const TorusGrid g = TorusGrid::make(1, N, 2 * N * N / 16, 0.02);
    auto base = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, 1, 0.0));
    auto mn = std::make_shared<const MollifiedNoise>(mollify(base, Mollifier::bump(g, 8)));
    const ScalarField z0 = ScalarField::sample(g, [&](const Point& x) { return 1.0 + a * std::cos(kTwoPi * x[0]); });
    const ColeHopfTrajectory traj = cole_hopf(std::make_shared<const HeatSolution>(solve_heat_from(mn, z0)));
    double e = 0.0;
    for (int k = 0; k <= g.M; ++k)
      for (std::size_t i = 0; i < g.nodes(); ++i) {
        const double x = g.position(i)[0];
        const double q = a * std::exp(-kTwoPi * kTwoPi * g.time(k));
        const double exact = -q * kTwoPi * std::sin(kTwoPi * x) / (1.0 + q * std::cos(kTwoPi * x));
        e = std::max(e, std::abs(traj.U[k].at(i, 0) - exact));
      }
    h.push_back(g.dx());
    err.push_back(e);
  }
  CHECK(measure_order(h, err) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("laplacian ratio gap") {
  const TorusGrid g = TorusGrid::make(1, 32, 2, 1.0);
  const ScalarField c(g, 2.5);
  ScalarField log_c(g, std::log(2.5));
  CHECK(laplacian_ratio_gap(c, log_c) == 0.0);

  std::vector<double> h, gaps;
  for (int N : {32, 64, 128, 256}) {
    const TorusGrid gn = TorusGrid::make(1, N, 2, 1.0);
    const ScalarField H = ScalarField::sample(gn, [](const Point& x) { return std::sin(kTwoPi * x[0]); });
    ScalarField Z = H;
    for (double& v : Z.values) v = std::exp(v);
    h.push_back(gn.dx());
    gaps.push_back(laplacian_ratio_gap(Z, H));
  }
  CHECK(measure_order(h, gaps) == doctest::Approx(2.0).epsilon(0.1));

  // Axis-aligned 2-D data reproduce the 1-D gap.
  const TorusGrid g1 = TorusGrid::make(1, 64, 2, 1.0), g2 = TorusGrid::make(2, 64, 2, 1.0);
  auto sample_pair = [](const TorusGrid& gg) {
    const ScalarField H = ScalarField::sample(gg, [](const Point& x) { return 0.7 * std::cos(kTwoPi * x[0]); });
    ScalarField Z = H;
    for (double& v : Z.values) v = std::exp(v);
    return laplacian_ratio_gap(Z, H);
  };
  CHECK(sample_pair(g1) == doctest::Approx(sample_pair(g2)).epsilon(1e-13));
}

TEST_CASE("KPZ residual: exact zero, gauge invariance and realization check") {
  const TorusGrid g = TorusGrid::make(1, 64, 4096, 0.05);
  const Run quiet = run(g, 2, 0.0, 8, InitialData::zero());
  for (double r : kpz_residual(quiet.traj, *quiet.noise)) CHECK(r == 0.0);

  auto base = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, 2, 1.0));
  auto mn = std::make_shared<const MollifiedNoise>(mollify(base, Mollifier::bump(g, 8)));
  const ScalarField z0 = InitialData::cosine(0.5, 1).sample(g);
  ScalarField e0 = z0, shifted = z0;
  for (std::size_t i = 0; i < z0.size(); ++i) {
    e0[i] = std::exp(z0[i]);
    shifted[i] = std::exp(z0[i] + 1.3);
  }
  const auto r0 = kpz_residual(cole_hopf(std::make_shared<const HeatSolution>(solve_heat_from(mn, e0))), *mn);
  const auto r1 = kpz_residual(cole_hopf(std::make_shared<const HeatSolution>(solve_heat_from(mn, shifted))), *mn);
  for (std::size_t k = 0; k < r0.size(); ++k) CHECK(std::abs(r0[k] - r1[k]) <= 1e-9 * (r0[k] + 1e-12));

  const Run other = run(g, 3, 1.0, 8, InitialData::zero());
  try {
    kpz_residual(other.traj, *mn);
    FAIL("expected mismatched realization");
  } catch (const LabError& e) {
    CHECK(e.code() == Errc::mismatched_realization);
  }
}

TEST_CASE("coupled refinement: KPZ residual and weak gap orders") {
  const TorusGrid fine = TorusGrid::make(1, 256, 8192, 0.02);
  const TestFunction phi("phi", 1, 0.01, 0.008, Point{0.4, 0, 0}, 0.25, Point{1.0, 0, 0});
  auto master = std::make_shared<const WhiteNoiseRealization>(sample_noise(fine, 17, 1.0));
  std::vector<double> h, kpz, gaps;
  for (int level = 0; level < 3; ++level) {
    auto base = level == 0 ? master
                           : std::make_shared<const WhiteNoiseRealization>(
                                 coarse_grain(*master, 1 << level, 1 << (2 * level)));
    const Run r = run(base, 8, InitialData::cosine(0.5, 1));
    h.push_back(base->grid.dt());
    kpz.push_back(pairwise_sum(kpz_residual(r.traj, *r.noise)));
    gaps.push_back(weak_residual(r.traj, phi, *r.noise, *base).gap);
  }
  CHECK(measure_order(h, kpz) >= 0.9);
  CHECK(measure_order(h, gaps) >= 0.9);
}

TEST_CASE("weak residual: zero case, adjoint form of the limit gap, support check") {
  const TorusGrid g = TorusGrid::make(1, 64, 4096, 0.05);
  const TestFunction phi = centred_phi(1, g.T);
  const Run quiet = run(g, 4, 0.0, 8, InitialData::zero());
  const WeakResidualReport z = weak_residual(quiet.traj, phi, *quiet.noise, *quiet.base);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
  CHECK(z.gap == 0.0);

  const Run r = run(g, 4, 1.0, 8, InitialData::cosine(0.5, 1));
  const WeakResidualReport w = weak_residual(r.traj, phi, *r.noise, *r.base);
  CHECK(w.gap == doctest::Approx(std::abs(w.lhs - w.rhs)));
  CHECK(w.n == 8);
  CHECK(w.seed == 4);
  // rhs - limit = -sum psi (rho_n * D - D) dW dx, D the sampled spatial divergence.
  const ScalarField div = ScalarField::sample(g, [&](const Point& x) { return phi.spatial_divergence(x); });
  const ScalarField smooth = convolve(div, r.noise->mollifier);
  double expected = 0.0;
  for (int k = 0; k < g.M; ++k) {
    const auto slice = r.base->slice(k);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes(); ++i) s += (smooth[i] - div[i]) * slice[i];
    expected -= phi.temporal(g.time(k)) * s * g.dx();
  }
  CHECK(w.rhs - w.limit_pairing == doctest::Approx(expected).epsilon(1e-9));

  const TestFunction late("late", 1, 0.045, 0.01, Point{0.5, 0, 0}, 0.2, Point{1, 0, 0});
  CHECK_THROWS_AS(weak_residual(r.traj, late, *r.noise, *r.base), LabError);
}

TEST_CASE("distributional limit") {
  const TorusGrid g = TorusGrid::make(1, 128, 4096, 0.02);
  const TestFunction phi = centred_phi(1, g.T);
  auto zero = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, 5, 0.0));
  std::vector<Run> runs;
  for (int n : {4, 8, 16}) runs.push_back(run(zero, n, InitialData::cosine(0.5, 1)));
  std::vector<const ColeHopfTrajectory*> ptrs;
  for (const Run& r : runs) ptrs.push_back(&r.traj);
  const DistributionalLimit lim = distributional_limit_1d(ptrs, phi);
  REQUIRE(lim.values.size() == 3);
  REQUIRE(lim.cauchy_gaps.size() == 2);
  CHECK(lim.values[0] == lim.values[1]);
  CHECK(lim.values[1] == lim.values[2]);
  CHECK(lim.values[0] == doctest::Approx(pair_velocity(runs[0].traj, phi)));
  CHECK(lim.values[0] != 0.0);

  const TorusGrid g2 = TorusGrid::make(2, 16, 256, 0.1);
  const Run r2 = run(g2, 1, 1.0, 4, InitialData::zero());
  const ColeHopfTrajectory* p2 = &r2.traj;
  try {
    distributional_limit_1d(std::span<const ColeHopfTrajectory* const>(&p2, 1), centred_phi(2, g2.T));
    FAIL("expected dimension error");
  } catch (const LabError& e) {
    CHECK(e.code() == Errc::dimension);
  }
}

TEST_CASE("time section") {
  const TorusGrid g = TorusGrid::make(1, 128, 32768, 0.1);
  const TestFunction phi("phi_x", 1, 0.05, 0.04, Point{0.3, 0, 0}, 0.2, Point{1, 0, 0});
  const Run flat = run(g, 6, 0.0, 8, InitialData::zero());
  CHECK(lojasiewicz_section(flat.traj, phi, g.T / 8) == 0.0);
  CHECK_THROWS_AS(lojasiewicz_section(flat.traj, phi, g.T / 2), LabError);
  CHECK_THROWS_AS(lojasiewicz_section(flat.traj, phi, 0.0), LabError);

  const InitialData f = InitialData::cosine(0.5, 1);
  const Run smooth = run(g, 6, 0.0, 8, f);
  const VectorField spatial = VectorField::sample(g, [&](const Point& x) { return phi.spatial(x); });
  const double reference = inner_space(gradient(f.sample(g)), spatial);
  std::vector<double> eps, err;
  for (int j : {8, 16, 32}) {
    const double e = g.T / j;
    const double s_div = lojasiewicz_section(smooth.traj, phi, e, SectionForm::divergence);
    const double s_grad = lojasiewicz_section(smooth.traj, phi, e, SectionForm::gradient);
    CHECK(std::abs(s_div - s_grad) <= 1e-12 * std::abs(s_grad));
    eps.push_back(e);
    err.push_back(std::abs(s_div - reference));
  }
  CHECK(measure_order(eps, err) >= 0.9);
}
