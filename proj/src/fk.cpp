#include "burgerslab/fk.hpp"

#include <cmath>

#include "burgerslab/error.hpp"
#include "burgerslab/parallel.hpp"
#include "burgerslab/random.hpp"
#include "burgerslab/stats.hpp"

namespace burgerslab {

std::string to_string(FkMode mode) {
  return mode == FkMode::ito_compensated ? "ito-compensated" : "uncompensated";
}

namespace {

double wrap(double x, double L) { return x - L * std::floor(x / L); }

}  // namespace

std::vector<Point> brownian_path(const TorusGrid& grid, std::uint64_t seed, std::uint64_t path_index, int steps) {
  if (steps < 0) throw LabError(Errc::invalid_argument, "brownian_path: negative step count");
  NormalSource normal(Stream::brownian, seed, path_index);
  const double sigma = std::sqrt(2.0 * grid.dt());
  std::vector<Point> path(static_cast<std::size_t>(steps) + 1, Point{0.0, 0.0, 0.0});
  for (int j = 1; j <= steps; ++j) {
    for (int a = 0; a < grid.d; ++a) path[j][a] = wrap(path[j - 1][a] + sigma * normal(), grid.L);
  }
  return path;
}

FkPair fk_estimate_modes(const MollifiedNoise& noise, const std::function<double(const Point&)>& initial_density,
                         const FkRequest& request) {
  const TorusGrid& g = noise.grid();
  if (request.step < 0 || request.step > g.M)
    throw LabError(Errc::off_grid, "fk_estimate: step " + std::to_string(request.step) + " outside [0, M]");
  if (request.node >= g.nodes()) throw LabError(Errc::off_grid, "fk_estimate: node index out of range");
  if (request.num_paths < 100) throw LabError(Errc::invalid_argument, "fk_estimate: num_paths must be >= 100");

  const int K = request.step;
  const double t = g.time(K);
  const Point x = g.position(request.node);
  const double sigma = std::sqrt(2.0 * g.dt());
  const double compensator = 0.5 * noise.compensator_rate() * t;

  // Per path: the initial density at the path end and the stochastic exponent
  // sum_j dW^n(K-1-j, x + B_{s_j}) pairing s with t - s.
  std::vector<double> weight(request.num_paths), exponent(request.num_paths);
  parallel_for(static_cast<std::size_t>(request.num_paths), request.threads, [&](std::size_t p) {
    NormalSource normal(Stream::brownian, request.path_seed, request.first_path + p);
    Point y = x;
    double e = 0.0;
    for (int j = 0; j < K; ++j) {
      e += noise.slice(K - 1 - j)[g.nearest_node(y)];
      for (int a = 0; a < g.d; ++a) y[a] = wrap(y[a] + sigma * normal(), g.L);
    }
    weight[p] = initial_density(y);
    exponent[p] = e;
  });

  std::vector<double> comp(request.num_paths), uncomp(request.num_paths);
  for (int p = 0; p < request.num_paths; ++p) {
    uncomp[p] = weight[p] * std::exp(exponent[p]);
    comp[p] = weight[p] * std::exp(exponent[p] - compensator);
  }
  auto summarize = [&](const std::vector<double>& samples, FkMode mode) {
    const SampleMoments m = sample_moments(samples);
    return FkEstimate{t, x, K, request.node, request.num_paths, m.mean, m.stderr_mean, mode};
  };
  return {summarize(comp, FkMode::ito_compensated), summarize(uncomp, FkMode::uncompensated)};
}

FkEstimate fk_estimate(const MollifiedNoise& noise, const InitialData& f, const FkRequest& request, FkMode mode) {
  const int d = noise.grid().d;
  const FkPair both = fk_estimate_modes(noise, [&](const Point& y) { return std::exp(f(y, d)); }, request);
  return mode == FkMode::ito_compensated ? both.compensated : both.uncompensated;
}

}  // namespace burgerslab
