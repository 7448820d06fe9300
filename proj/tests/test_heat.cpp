#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "burgerslab/error.hpp"
#include "burgerslab/heat.hpp"
#include "burgerslab/stats.hpp"

using namespace burgerslab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::shared_ptr<const MollifiedNoise> noise_on(const TorusGrid& g, std::uint64_t seed, double lambda, int n) {
  auto base = std::make_shared<const WhiteNoiseRealization>(sample_noise(g, seed, lambda));
  return std::make_shared<const MollifiedNoise>(mollify(base, Mollifier::bump(g, n)));
}

}  // namespace

TEST_CASE("stability margin arithmetic") {
  CHECK(stability_check(TorusGrid::make(1, 16, 512, 1.0)) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(stability_check(TorusGrid::make(2, 16, 2048, 1.0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(stability_check(TorusGrid::make(3, 8, 64, 1.0)) < 0.0);
}

TEST_CASE("initial data presets") {
  const InitialData c = InitialData::cosine(0.5, 2);
  const Point x{0.1, 0.3, 0.0};
  CHECK(c(x, 2) == doctest::Approx(0.5 * (std::cos(kTwoPi * 0.2) + std::cos(kTwoPi * 0.6))));
  CHECK(InitialData::zero()(x, 3) == 0.0);
  CHECK_THROWS_AS(InitialData::gaussian_bump(1.0, 0.0, Point{0.5, 0.5, 0.5}), LabError);

  // Analytic gradients against central differences.
  const InitialData bump = InitialData::gaussian_bump(0.7, 0.12, Point{0.9, 0.2, 0.5});
  for (const InitialData* f : {&c, &bump}) {
    const Point grad = f->gradient(x, 2);
    for (int a = 0; a < 2; ++a) {
      Point xp = x, xm = x;
      xp[a] += 1e-6;
      xm[a] -= 1e-6;
      CHECK(grad[a] == doctest::Approx(((*f)(xp, 2) - (*f)(xm, 2)) / 2e-6).epsilon(1e-6));
    }
  }
  // Periodized bump is periodic.
  CHECK(bump(Point{0.05, 0.2, 0}, 2) == doctest::Approx(bump(Point{1.05, 1.2, 0}, 2)).epsilon(1e-12));
}

TEST_CASE("heat step without noise is the explicit heat step") {
  const TorusGrid g = TorusGrid::make(1, 32, 1024, 0.25);
  const ScalarField z = ScalarField::sample(g, [](const Point& x) { return 2.0 + std::sin(kTwoPi * x[0]); });
  const std::vector<double> quiet(g.nodes(), 0.0);
  const ScalarField next = heat_step(z, quiet, 0.0, 123.0);
  const ScalarField lap = laplacian(z);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(next[i] == z[i] + g.dt() * lap[i]);

  const ScalarField constant(g, 1.75);
  const ScalarField same = heat_step(constant, quiet, 0.0, 0.0);
  for (double v : same.values) CHECK(v == 1.75);
}

TEST_CASE("heat step errors") {
  const TorusGrid unstable = TorusGrid::make(1, 32, 4, 1.0);
  const std::vector<double> quiet(32, 0.0);
  try {
    heat_step(ScalarField(unstable, 1.0), quiet, 0.0, 0.0);
    FAIL("expected stability violation");
  } catch (const LabError& e) {
    CHECK(e.code() == Errc::stability_violation);
  }
  const TorusGrid g = TorusGrid::make(1, 32, 4096, 1.0);
  ScalarField z(g, 1.0);
  z[7] = 0.0;
  try {
    heat_step(z, quiet, 0.0, 0.0);
    FAIL("expected non-positive error");
  } catch (const LabError& e) {
    CHECK(e.code() == Errc::non_positive);
  }
  CHECK_THROWS_AS(heat_step(ScalarField(g, 1.0), std::vector<double>(31, 0.0), 0.0, 0.0), LabError);
}

TEST_CASE("multiplicative factor has unit mean") {
  const TorusGrid g = TorusGrid::make(1, 64, 1000, 50.0);
  const Mollifier m = Mollifier::bump(g, 8);
  const double c = m.c_n_discrete();
  std::vector<double> factors;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto mn = noise_on(g, 300 + s, 1.0, 8);
    for (int k = 0; k < g.M; ++k) factors.push_back(std::exp(mn->slice(k)[0] - 0.5 * c * g.dt()));
  }
  REQUIRE(factors.size() == 100000);
  const SampleMoments mom = sample_moments(factors);
  CHECK(std::abs(mom.mean - 1.0) <= 4.0 * mom.stderr_mean);
  CHECK(c * g.dt() > 0.1);  // the compensator is not negligible at this dt
}

TEST_CASE("single Fourier mode oracle") {
  const double a = 0.5;
  std::vector<double> h, err;
  for (int N : {16, 32, 64}) {
    const TorusGrid g = TorusGrid::make(1, N, N * N * 2, 0.05);
    auto mn = noise_on(g, 1, 0.0, 4);
    const ScalarField z0 = ScalarField::sample(g, [&](const Point& x) { return 1.0 + a * std::cos(kTwoPi * x[0]); });
    const HeatSolution sol = solve_heat_from(mn, z0);
    double e = 0.0;
    for (int k = 0; k <= g.M; ++k)
      for (std::size_t i = 0; i < g.nodes(); ++i) {
        const double exact = 1.0 + a * std::exp(-kTwoPi * kTwoPi * g.time(k)) * std::cos(kTwoPi * g.position(i)[0]);
        e = std::max(e, std::abs(sol.trajectory[k][i] - exact));
      }
    // Eigenvalue and Euler remainders: a T k^4 (dx^2/12 + dt/2).
    CHECK(e <= a * g.T * std::pow(kTwoPi, 4) * (g.dx() * g.dx() / 12.0 + g.dt() / 2.0) * 1.1);
    h.push_back(g.dx());
    err.push_back(e);
  }
  CHECK(measure_order(h, err) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("zero data and zero noise keep Z identically one") {
  const TorusGrid g = TorusGrid::make(2, 16, 256, 0.1);
  const HeatSolution sol = solve_heat(noise_on(g, 3, 0.0, 4), InitialData::zero());
  for (const ScalarField& z : sol.trajectory)
    for (double v : z.values) CHECK(v == 1.0);
}

TEST_CASE("trajectory starts at exp(f) and stays positive") {
  const TorusGrid g = TorusGrid::make(1, 64, 8192, 0.1);
  const InitialData f = InitialData::cosine(0.5, 1);
  const HeatSolution sol = solve_heat(noise_on(g, 5, 1.0, 8), f);
  CHECK(sol.trajectory.size() == static_cast<std::size_t>(g.M + 1));
  for (std::size_t i = 0; i < g.nodes(); ++i) CHECK(sol.trajectory[0][i] == std::exp(f(g.position(i), 1)));
  for (const ScalarField& z : sol.trajectory)
    for (double v : z.values) REQUIRE(v > 0.0);
  CHECK(sol.stability_margin == doctest::Approx(stability_check(g)));
  CHECK(sol.c_n == sol.noise->mollifier.c_n_discrete());
}

TEST_CASE("ensemble mean solves the deterministic heat equation") {
  const TorusGrid g = TorusGrid::make(1, 32, 256, 0.1);
  const InitialData f = InitialData::cosine(0.5, 1);
  const double quiet = solve_heat(noise_on(g, 1, 0.0, 4), f).trajectory[g.M][5];
  std::vector<double> samples;
  for (std::uint64_t s = 0; s < 1000; ++s) samples.push_back(solve_heat(noise_on(g, 700 + s, 1.0, 4), f).trajectory[g.M][5]);
  const SampleMoments m = sample_moments(samples);
  CHECK(std::abs(m.mean - quiet) <= 4.0 * m.stderr_mean);
}

TEST_CASE("solver rejects unstable grids and mismatched data") {
  const TorusGrid g = TorusGrid::make(1, 32, 16, 1.0);
  auto mn = noise_on(g, 1, 1.0, 4);
  CHECK_THROWS_AS(solve_heat(mn, InitialData::zero()), LabError);
  const TorusGrid ok = TorusGrid::make(1, 32, 4096, 1.0);
  CHECK_THROWS_AS(solve_heat_from(noise_on(ok, 1, 1.0, 4), ScalarField(g, 1.0)), LabError);
  CHECK_THROWS_AS(solve_heat(nullptr, InitialData::zero()), LabError);
}
