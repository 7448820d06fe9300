#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "burgerslab/lattice.hpp"
#include "burgerslab/noise.hpp"

namespace burgerslab {

/// Initial log-density f; Z(0) = exp(f). Presets only.
struct InitialData {
  enum class Kind { zero, cosine, gaussian_bump };

  Kind kind = Kind::zero;
  double amplitude = 0.0;
  int wavenumber = 1;       // cosine
  double width = 0.1;       // gaussian_bump
  Point center{0.5, 0.5, 0.5};  // gaussian_bump
  double L = 1.0;

  static InitialData zero();
  /// f(x) = a * sum_j cos(2 pi k x_j / L)
  static InitialData cosine(double a, int k, double L = 1.0);
  /// Periodized Gaussian a * sum_images exp(-|x - c|^2 / (2 w^2))
  static InitialData gaussian_bump(double a, double w, const Point& center, double L = 1.0);

  double operator()(const Point& x, int d) const;
  /// Analytic gradient, used by oracles.
  Point gradient(const Point& x, int d) const;
  ScalarField sample(const TorusGrid& grid) const;
  std::string describe() const;
};

struct HeatSolution {
  TorusGrid grid;
  std::shared_ptr<const MollifiedNoise> noise;
  std::vector<ScalarField> trajectory;  // time nodes 0..M
  double stability_margin = 0.0;
  double lambda = 0.0;
  double c_n = 0.0;
};

/// 1 - 2 d dt / dx^2; negative means the explicit step is unstable.
double stability_check(const TorusGrid& grid);

/// One step: (Z + dt Lap Z) * exp(dW^n - lambda^2 c_n dt / 2).
/// `noise_slice` already carries the lambda amplitude.
ScalarField heat_step(const ScalarField& Z, std::span<const double> noise_slice, double lambda,
                      double c_n);

HeatSolution solve_heat(std::shared_ptr<const MollifiedNoise> noise, const InitialData& f);

/// Same scheme started from an arbitrary positive Z(0) (test hook for
/// linear-mode and linearity oracles).
HeatSolution solve_heat_from(std::shared_ptr<const MollifiedNoise> noise, const ScalarField& initial);

}  // namespace burgerslab
