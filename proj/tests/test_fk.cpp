#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "burgerslab/error.hpp"
#include "burgerslab/fk.hpp"
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

TEST_CASE("Brownian paths start at zero with variance 2t per axis") {
  const TorusGrid g = TorusGrid::make(2, 32, 50, 0.005);
  std::vector<double> end_x, end_y, first_step;
  for (std::uint64_t p = 0; p < 10000; ++p) {
    const auto path = brownian_path(g, 3, p, g.M);
    CHECK(path[0] == Point{0.0, 0.0, 0.0});
    end_x.push_back(periodic_delta(path.back()[0], 0.0, g.L));
    end_y.push_back(periodic_delta(path.back()[1], 0.0, g.L));
    first_step.push_back(periodic_delta(path[1][0], 0.0, g.L));
  }
  CHECK(std::abs(sample_moments(end_x).variance / (2.0 * g.T) - 1.0) <= 0.05);
  CHECK(std::abs(sample_moments(end_y).variance / (2.0 * g.T) - 1.0) <= 0.05);
  const SampleMoments inc = sample_moments(first_step);
  CHECK(std::abs(inc.mean) <= 4.0 * inc.stderr_mean);
  // Positions stay on the torus.
  for (const Point& y : brownian_path(TorusGrid::make(1, 16, 400, 4.0), 1, 0, 400)) {
    CHECK(y[0] >= 0.0);
    CHECK(y[0] < 1.0);
  }
}

TEST_CASE("zero noise and zero data give exactly one") {
  const TorusGrid g = TorusGrid::make(1, 32, 512, 0.1);
  auto mn = noise_on(g, 1, 0.0, 4);
  FkRequest req;
  req.step = g.M;
  req.node = 3;
  req.num_paths = 500;
  const FkEstimate e = fk_estimate(*mn, InitialData::zero(), req, FkMode::ito_compensated);
  CHECK(e.mean == 1.0);
  CHECK(e.stderr_mean == 0.0);
  CHECK(e.t == doctest::Approx(g.T));
  CHECK(e.x[0] == g.position(3)[0]);
}

TEST_CASE("zero noise: heat-kernel Fourier oracle and mode agreement") {
  const TorusGrid g = TorusGrid::make(1, 64, 8192, 0.1);
  auto mn = noise_on(g, 1, 0.0, 8);
  const double a = 0.5;
  FkRequest req;
  req.step = g.M / 2;
  req.node = 11;
  req.num_paths = 10000;
  req.path_seed = 5;
  const FkPair both = fk_estimate_modes(*mn, [&](const Point& y) { return 1.0 + a * std::cos(kTwoPi * y[0]); }, req);
  const double t = g.time(req.step);
  const double exact = 1.0 + a * std::exp(-kTwoPi * kTwoPi * t) * std::cos(kTwoPi * g.position(req.node)[0]);
  CHECK(std::abs(both.compensated.mean - exact) <= 3.0 * both.compensated.stderr_mean);
  CHECK(both.compensated.mean == both.uncompensated.mean);
  CHECK(both.compensated.stderr_mean == both.uncompensated.stderr_mean);
}

TEST_CASE("path ends agree with brownian_path") {
  const TorusGrid g = TorusGrid::make(1, 32, 64, 0.1);
  auto mn = noise_on(g, 1, 0.0, 4);
  FkRequest req;
  req.step = 40;
  req.node = 9;
  req.num_paths = 100;
  req.path_seed = 77;
  req.first_path = 1000;
  std::vector<double> ends;
  fk_estimate_modes(*mn, [&](const Point& y) { ends.push_back(y[0]); return 1.0; }, req);
  REQUIRE(ends.size() == 100);
  for (std::size_t p = 0; p < ends.size(); p += 17) {
    const auto path = brownian_path(g, 77, 1000 + p, req.step);
    CHECK(periodic_delta(ends[p], g.position(9)[0] + path.back()[0], g.L) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("noisy estimate matches the solver in the compensated mode") {
  const TorusGrid g = TorusGrid::make(1, 32, 2048, 0.1);
  auto mn = noise_on(g, 8, 1.0, 4);
  const InitialData f = InitialData::cosine(0.5, 1);
  const HeatSolution sol = solve_heat(mn, f);
  FkRequest req;
  req.step = g.M;
  req.num_paths = 10000;
  req.path_seed = 9;
  for (std::size_t node : {std::size_t{3}, std::size_t{20}}) {
    req.node = node;
    req.first_path = node * 100000;
    const FkEstimate e = fk_estimate(*mn, f, req, FkMode::ito_compensated);
    CHECK(std::abs(e.mean - sol.trajectory[g.M][node]) <= 3.0 * e.stderr_mean);
  }
}

TEST_CASE("estimates do not depend on the thread count") {
  const TorusGrid g = TorusGrid::make(2, 16, 256, 0.05);
  auto mn = noise_on(g, 2, 1.0, 4);
  FkRequest req;
  req.step = 100;
  req.node = 37;
  req.num_paths = 1000;
  const FkEstimate one = fk_estimate(*mn, InitialData::cosine(0.3, 1), req, FkMode::uncompensated);
  req.threads = 3;
  const FkEstimate three = fk_estimate(*mn, InitialData::cosine(0.3, 1), req, FkMode::uncompensated);
  CHECK(one.mean == three.mean);
  CHECK(one.stderr_mean == three.stderr_mean);
}

TEST_CASE("standard error shrinks like one over root paths") {
  const TorusGrid g = TorusGrid::make(1, 32, 512, 0.1);
  auto mn = noise_on(g, 4, 1.0, 4);
  FkRequest req;
  req.step = g.M;
  req.node = 5;
  std::vector<double> paths, errs;
  std::uint64_t offset = 0;
  for (int n : {100, 1000, 10000}) {
    req.num_paths = n;
    req.first_path = offset;
    offset += n;
    paths.push_back(n);
    errs.push_back(fk_estimate(*mn, InitialData::cosine(0.5, 1), req, FkMode::ito_compensated).stderr_mean);
  }
  CHECK(measure_order(paths, errs) == doctest::Approx(-0.5).epsilon(0.2));
}

TEST_CASE("request validation") {
  const TorusGrid g = TorusGrid::make(1, 32, 64, 0.1);
  auto mn = noise_on(g, 1, 1.0, 4);
  FkRequest req;
  req.num_paths = 100;
  req.step = g.M + 1;
  try {
    fk_estimate(*mn, InitialData::zero(), req, FkMode::uncompensated);
    FAIL("expected off-grid error");
  } catch (const LabError& e) {
    CHECK(e.code() == Errc::off_grid);
  }
  req.step = 1;
  req.node = g.nodes();
  CHECK_THROWS_AS(fk_estimate(*mn, InitialData::zero(), req, FkMode::uncompensated), LabError);
  req.node = 0;
  req.num_paths = 99;
  CHECK_THROWS_AS(fk_estimate(*mn, InitialData::zero(), req, FkMode::uncompensated), LabError);
  CHECK(to_string(FkMode::ito_compensated) == "ito-compensated");
}
