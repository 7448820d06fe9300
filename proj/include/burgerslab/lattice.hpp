#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace burgerslab {

inline constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;
using Coords = std::array<int, kMaxDim>;

/// Periodic space-time lattice [0,L)^d x [0,T] with N nodes per axis and M
/// time steps. Nodes are stored row-major: axis 0 is the slowest index.
struct TorusGrid {
  int d = 1;
  int N = 8;
  int M = 2;
  double L = 1.0;
  double T = 1.0;

  /// Validating constructor; throws LabError(invalid_argument).
  static TorusGrid make(int d, int N, int M, double T, double L = 1.0);

  double dx() const { return L / N; }
  double dt() const { return T / M; }
  double cell_volume() const;
  std::size_t nodes() const;
  std::size_t stride(int axis) const;

  Coords coords(std::size_t node) const;
  std::size_t index(const Coords& c) const;
  Point position(std::size_t node) const;

  /// Periodic neighbour of `node` shifted by `shift` cells along `axis`.
  std::size_t neighbor(std::size_t node, int axis, int shift) const;

  /// Nearest node to an arbitrary point, with periodic wrap.
  std::size_t nearest_node(const Point& x) const;

  double time(int k) const { return k * dt(); }

  bool operator==(const TorusGrid&) const = default;
};

/// Minimal signed periodic displacement a - b along one axis of length L.
double periodic_delta(double a, double b, double L);

struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0);
  ScalarField(const TorusGrid& g, std::vector<double> v);

  static ScalarField sample(const TorusGrid& g, const std::function<double(const Point&)>& f);

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
  bool all_finite() const;
};

/// Node-major vector field: component a of node i lives at values[i*d + a].
struct VectorField {
  TorusGrid grid;
  std::vector<double> values;

  VectorField() = default;
  explicit VectorField(const TorusGrid& g, double fill = 0.0);

  static VectorField sample(const TorusGrid& g,
                            const std::function<Point(const Point&)>& f);

  double& at(std::size_t node, int axis) { return values[node * grid.d + axis]; }
  double at(std::size_t node, int axis) const { return values[node * grid.d + axis]; }
  double norm_sq(std::size_t node) const;
  bool all_finite() const;
};

ScalarField laplacian(const ScalarField& u);
VectorField gradient(const ScalarField& u);
ScalarField divergence(const VectorField& v);

double inner_space(const ScalarField& u, const ScalarField& v);
double inner_space(const VectorField& u, const VectorField& v);

double inner_spacetime(std::span<const ScalarField> u, std::span<const ScalarField> v);
double inner_spacetime(std::span<const VectorField> u, std::span<const VectorField> v);

double max_abs(const ScalarField& u);
double max_abs_diff(const ScalarField& u, const ScalarField& v);

}  // namespace burgerslab
