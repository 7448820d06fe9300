#include "burgerslab/heat.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "burgerslab/error.hpp"

namespace burgerslab {

InitialData InitialData::zero() { return {}; }

InitialData InitialData::cosine(double a, int k, double L) {
  InitialData f;
  f.kind = Kind::cosine;
  f.amplitude = a;
  f.wavenumber = k;
  f.L = L;
  return f;
}

InitialData InitialData::gaussian_bump(double a, double w, const Point& center, double L) {
  if (!(w > 0.0)) throw LabError(Errc::invalid_argument, "gaussian_bump width must be positive");
  InitialData f;
  f.kind = Kind::gaussian_bump;
  f.amplitude = a;
  f.width = w;
  f.center = center;
  f.L = L;
  return f;
}

namespace {

constexpr int kImages = 2;

// Periodized 1-D Gaussian factor and its derivative along one axis.
std::pair<double, double> gaussian_axis(double x, double c, double w, double L) {
  double value = 0.0, slope = 0.0;
  for (int m = -kImages; m <= kImages; ++m) {
    const double s = x - c + m * L;
    const double e = std::exp(-s * s / (2.0 * w * w));
    value += e;
    slope += -s / (w * w) * e;
  }
  return {value, slope};
}

}  // namespace

double InitialData::operator()(const Point& x, int d) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::cosine: {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += std::cos(2.0 * std::numbers::pi * wavenumber * x[a] / L);
      return amplitude * s;
    }
    case Kind::gaussian_bump: {
      double p = amplitude;
      for (int a = 0; a < d; ++a) p *= gaussian_axis(x[a], center[a], width, L).first;
      return p;
    }
  }
  return 0.0;
}

Point InitialData::gradient(const Point& x, int d) const {
  Point g{0.0, 0.0, 0.0};
  switch (kind) {
    case Kind::zero:
      break;
    case Kind::cosine: {
      const double k = 2.0 * std::numbers::pi * wavenumber / L;
      for (int a = 0; a < d; ++a) g[a] = -amplitude * k * std::sin(k * x[a]);
      break;
    }
    case Kind::gaussian_bump: {
      std::array<std::pair<double, double>, kMaxDim> axis{};
      for (int a = 0; a < d; ++a) axis[a] = gaussian_axis(x[a], center[a], width, L);
      for (int a = 0; a < d; ++a) {
        double p = amplitude * axis[a].second;
        for (int b = 0; b < d; ++b)
          if (b != a) p *= axis[b].first;
        g[a] = p;
      }
      break;
    }
  }
  return g;
}

ScalarField InitialData::sample(const TorusGrid& grid) const {
  return ScalarField::sample(grid, [&](const Point& x) { return (*this)(x, grid.d); });
}

std::string InitialData::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::zero: os << "zero"; break;
    case Kind::cosine: os << "cosine(a=" << amplitude << ",k=" << wavenumber << ")"; break;
    case Kind::gaussian_bump: os << "gaussian-bump(a=" << amplitude << ",w=" << width << ")"; break;
  }
  return os.str();
}

double stability_check(const TorusGrid& grid) {
  return 1.0 - 2.0 * grid.d * grid.dt() / (grid.dx() * grid.dx());
}

ScalarField heat_step(const ScalarField& Z, std::span<const double> noise_slice, double lambda, double c_n) {
  const TorusGrid& g = Z.grid;
  if (stability_check(g) < 0.0)
    throw LabError(Errc::stability_violation,
                   "dt=" + std::to_string(g.dt()) + " exceeds dx^2/(2d)=" +
                       std::to_string(g.dx() * g.dx() / (2.0 * g.d)));
  if (noise_slice.size() != Z.size()) throw LabError(Errc::shape_mismatch, "heat_step: noise slice size");
  const double dt = g.dt();
  const double compensator = 0.5 * lambda * lambda * c_n * dt;
  ScalarField lap = laplacian(Z);
  ScalarField out(g);
  for (std::size_t i = 0; i < Z.size(); ++i) {
    if (!(Z[i] > 0.0))
      throw LabError(Errc::non_positive, "heat_step: Z[" + std::to_string(i) + "]=" + std::to_string(Z[i]));
    out[i] = (Z[i] + dt * lap[i]) * std::exp(noise_slice[i] - compensator);
  }
  return out;
}

HeatSolution solve_heat_from(std::shared_ptr<const MollifiedNoise> noise, const ScalarField& initial) {
  if (!noise) throw LabError(Errc::invalid_argument, "solve_heat: null noise");
  const TorusGrid& g = noise->grid();
  if (!(initial.grid == g)) throw LabError(Errc::shape_mismatch, "solve_heat: initial data grid differs from noise grid");
  if (!noise->mollifier.resolved()) throw LabError(Errc::under_resolved, "solve_heat: mollifier not grid-resolved");
  const double margin = stability_check(g);
  if (margin < 0.0)
    throw LabError(Errc::stability_violation, "solve_heat: stability margin " + std::to_string(margin) + " < 0");

  HeatSolution sol;
  sol.grid = g;
  sol.noise = noise;
  sol.stability_margin = margin;
  sol.lambda = noise->lambda();
  sol.c_n = noise->mollifier.c_n_discrete();
  sol.trajectory.reserve(static_cast<std::size_t>(g.M) + 1);
  sol.trajectory.push_back(initial);
  for (int k = 0; k < g.M; ++k)
    sol.trajectory.push_back(heat_step(sol.trajectory.back(), noise->slice(k), sol.lambda, sol.c_n));
  return sol;
}

HeatSolution solve_heat(std::shared_ptr<const MollifiedNoise> noise, const InitialData& f) {
  if (!noise) throw LabError(Errc::invalid_argument, "solve_heat: null noise");
  ScalarField z0 = f.sample(noise->grid());
  for (double& v : z0.values) v = std::exp(v);
  return solve_heat_from(std::move(noise), z0);
}

}  // namespace burgerslab
