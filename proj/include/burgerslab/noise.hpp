#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "burgerslab/lattice.hpp"

namespace burgerslab {

/// Unnormalized bump exp(-1/(1-r^2)) for r^2 < 1, exactly 0 otherwise.
double bump_profile(double r2);

/// c_d with c_d * integral of bump_profile(|x|^2) over R^d equal to 1.
/// Computed once per dimension by radial composite Simpson quadrature.
double bump_normalization(int d);

/// ||rho||^2 in L^2(R^d) for the normalized profile, cached like c_d.
double bump_l2_sq(int d);

/// Unit-mass 1-D bump on (-1, 1); used for time delta nets.
double unit_bump_1d(double s);

struct StencilTap {
  Coords offset;
  double weight;  // dx^d * rho_n(offset * dx)
};

/// rho_n(x) = n^d rho(n x) on a given working grid. A grid-scale delta
/// variant (weight 1 at the origin) stands in for the unmollified noise.
class Mollifier {
 public:
  static Mollifier bump(const TorusGrid& grid, int scale_n);
  static Mollifier grid_delta(const TorusGrid& grid);

  int scale_n() const { return scale_n_; }
  bool is_grid_delta() const { return scale_n_ == 0; }
  const TorusGrid& grid() const { return grid_; }

  double support_radius() const { return support_radius_; }
  double rho_l2_sq() const { return rho_l2_sq_; }
  double c_n_continuum() const { return c_n_continuum_; }
  double c_n_discrete() const { return c_n_discrete_; }
  /// dx^d * sum_j rho_n(x_j)
  double grid_mass() const { return grid_mass_; }

  /// Continuum density rho_n(x); x is a displacement, not wrapped.
  double density(const Point& x) const;

  /// support_radius >= 4 dx
  bool resolved() const;

  std::span<const StencilTap> stencil() const { return stencil_; }

 private:
  TorusGrid grid_;
  int scale_n_ = 0;
  double support_radius_ = 0.0;
  double rho_l2_sq_ = 0.0;
  double c_n_continuum_ = 0.0;
  double c_n_discrete_ = 0.0;
  double grid_mass_ = 0.0;
  std::vector<StencilTap> stencil_;
};

/// Periodic convolution of nodal values with the mollifier stencil.
std::vector<double> convolve(std::span<const double> values, const Mollifier& m);
ScalarField convolve(const ScalarField& u, const Mollifier& m);

/// Integral of rho_n over its support box by tensor composite Simpson;
/// independent of the radial route used for the normalization.
double mass_quadrature(const Mollifier& m);

/// h_n(z) = integral of rho_n(u) rho_n(u+z) du. rho is radial, so the
/// integral is evaluated at (|z|, 0, 0) and is exactly even in z.
double h_eval(const Mollifier& m, const Point& z);

/// Space-time white noise increments; slice k holds dW_{k,i} for all nodes i,
/// with variance lambda^2 dt / dx^d. Amplitude lambda is baked into the values.
struct WhiteNoiseRealization {
  TorusGrid grid;
  std::uint64_t seed = 0;
  double lambda = 1.0;
  std::vector<double> increments;

  std::span<const double> slice(int k) const {
    return {increments.data() + static_cast<std::size_t>(k) * grid.nodes(), grid.nodes()};
  }
};

WhiteNoiseRealization sample_noise(const TorusGrid& grid, std::uint64_t seed, double lambda = 1.0);

/// sum_{k,i} xi_{k,i} dW_{k,i} dx^d with xi laid out like the increments.
double pair(const WhiteNoiseRealization& noise, std::span<const double> xi);

struct MollifiedNoise {
  std::shared_ptr<const WhiteNoiseRealization> base;
  Mollifier mollifier;
  std::vector<double> increments;

  const TorusGrid& grid() const { return base->grid; }
  double lambda() const { return base->lambda; }
  std::span<const double> slice(int k) const {
    return {increments.data() + static_cast<std::size_t>(k) * grid().nodes(), grid().nodes()};
  }
  /// Quadratic variation per unit time of the simulated noise, lambda^2 c_n_discrete.
  double compensator_rate() const { return lambda() * lambda() * mollifier.c_n_discrete(); }
};

MollifiedNoise mollify(std::shared_ptr<const WhiteNoiseRealization> noise, const Mollifier& m);

/// Pairing of xi against the mollified increments (same weighting as pair()).
double pair(const MollifiedNoise& noise, std::span<const double> xi);

/// W^n_t(x) at the time nodes 0..M; starts at 0.
std::vector<double> wiener_path(const MollifiedNoise& mn, std::size_t node);
std::vector<double> wiener_path(const MollifiedNoise& mn, const Point& x);

double quadratic_variation(std::span<const double> path);

/// Block-sums increments over space_factor^d cells and time_factor steps,
/// rescaled to the coarse variance dt'/dx'^d.
WhiteNoiseRealization coarse_grain(const WhiteNoiseRealization& noise, int space_factor,
                                   int time_factor);
inline WhiteNoiseRealization coarse_grain(const WhiteNoiseRealization& noise, int factor) {
  return coarse_grain(noise, factor, factor);
}

/// Binary lattice file: int64 d, N, M; f64 L, T; u64 seed; f64 lambda;
/// then f64 payload, all little-endian.
struct LatticeFileHeader {
  TorusGrid grid;
  std::uint64_t seed = 0;
  double lambda = 1.0;
};

void write_lattice_file(const std::filesystem::path& path, const LatticeFileHeader& header,
                        std::span<const double> payload);
std::vector<double> read_lattice_file(const std::filesystem::path& path, LatticeFileHeader& header);

void save_noise(const std::filesystem::path& path, const WhiteNoiseRealization& noise);
WhiteNoiseRealization load_noise(const std::filesystem::path& path);

}  // namespace burgerslab
