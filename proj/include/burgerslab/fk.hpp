#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "burgerslab/heat.hpp"
#include "burgerslab/lattice.hpp"
#include "burgerslab/noise.hpp"

namespace burgerslab {

enum class FkMode { ito_compensated, uncompensated };

std::string to_string(FkMode mode);

struct FkEstimate {
  double t = 0.0;
  Point x{};
  int step = 0;
  std::size_t node = 0;
  int num_paths = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  FkMode mode = FkMode::ito_compensated;
};

/// Brownian motion with generator Lap (variance 2 dt per axis and step),
/// B_0 = 0, positions wrapped onto [0, L)^d. Returns steps + 1 positions.
std::vector<Point> brownian_path(const TorusGrid& grid, std::uint64_t seed, std::uint64_t path_index, int steps);

struct FkRequest {
  int step = 0;            // evaluation time t = step * dt
  std::size_t node = 0;    // evaluation point
  int num_paths = 10000;
  std::uint64_t path_seed = 1;
  std::uint64_t first_path = 0;  // substream offset, keeps probes independent
  int threads = 1;
};

struct FkPair {
  FkEstimate compensated;
  FkEstimate uncompensated;
};

/// Both correction modes from one shared set of Brownian paths.
FkPair fk_estimate_modes(const MollifiedNoise& noise, const std::function<double(const Point&)>& initial_density,
                         const FkRequest& request);

/// Monte Carlo estimate of Z_n(t, x) with Z(0) = exp(f).
FkEstimate fk_estimate(const MollifiedNoise& noise, const InitialData& f, const FkRequest& request, FkMode mode);

}  // namespace burgerslab
