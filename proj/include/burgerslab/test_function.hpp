#pragma once

#include <string>
#include <vector>

#include "burgerslab/lattice.hpp"

namespace burgerslab {

/// Standard unnormalized bump psi(s) = exp(-1/(1-s^2)) and its derivatives.
double psi(double s);
double psi_d1(double s);
double psi_d2(double s);

/// Vector-valued smooth test function with compact support inside
/// (0,T) x torus: phi_i(t,x) = a_i psi((t-t0)/rt) prod_j psi(dx_j/rx), where
/// dx_j is the minimal periodic displacement from the centre.
/// All derivatives are closed-form.
class TestFunction {
 public:
  TestFunction() = default;
  TestFunction(std::string id, int d, double t_center, double t_radius, const Point& x_center,
               double x_radius, const Point& amplitude, double L = 1.0);

  const std::string& id() const { return id_; }
  int dim() const { return d_; }
  double t_center() const { return t_center_; }
  double t_radius() const { return t_radius_; }
  const Point& x_center() const { return x_center_; }
  double x_radius() const { return x_radius_; }
  const Point& amplitude() const { return amplitude_; }

  /// Throws LabError(support_violation) unless the support is strictly inside (0,T) x torus.
  void validate(double T) const;

  double temporal(double t) const;
  double temporal_dt(double t) const;

  Point spatial(const Point& x) const;
  double spatial_divergence(const Point& x) const;
  Point spatial_laplacian(const Point& x) const;

  Point value(double t, const Point& x) const;
  Point time_derivative(double t, const Point& x) const;
  Point laplacian(double t, const Point& x) const;
  double divergence(double t, const Point& x) const;

  /// Lattice samples at time t.
  VectorField sample(const TorusGrid& g, double t) const;
  ScalarField sample_divergence(const TorusGrid& g, double t) const;

 private:
  std::string id_;
  int d_ = 1;
  double t_center_ = 0.0;
  double t_radius_ = 1.0;
  Point x_center_{};
  double x_radius_ = 0.1;
  Point amplitude_{};
  double L_ = 1.0;
};

/// Parameters of one bank entry, all relative to T and L.
struct TestFunctionSpec {
  std::string id;
  double t_center = 0.5;  // fraction of T
  double t_radius = 0.4;  // fraction of T
  double x_center = 0.5;  // fraction of L, axis j uses x_center + 0.17 j
  double x_radius = 0.25; // fraction of L
  Point amplitude{1.0, 0.0, 0.0};
};

struct BankSpec {
  bool use_default = true;
  std::vector<TestFunctionSpec> entries;  // used when use_default is false
};

std::vector<TestFunctionSpec> default_bank_entries();

/// Deterministic bank; validates every support against the grid.
std::vector<TestFunction> build_bank(const BankSpec& spec, const TorusGrid& grid);

}  // namespace burgerslab
