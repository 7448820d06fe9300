#include "burgerslab/lattice.hpp"

#include <cmath>
#include <sstream>

#include "burgerslab/error.hpp"

namespace burgerslab {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::shape_mismatch: return "shape mismatch";
    case Errc::stability_violation: return "stability violation";
    case Errc::non_positive: return "non-positive value";
    case Errc::under_resolved: return "under-resolved mollifier";
    case Errc::off_grid: return "off-grid point";
    case Errc::too_short: return "sequence too short";
    case Errc::non_divisible: return "non-divisible factor";
    case Errc::support_violation: return "support violation";
    case Errc::mismatched_realization: return "mismatched realization";
    case Errc::dimension: return "unsupported dimension";
    case Errc::invalid_config: return "invalid config";
    case Errc::io: return "i/o failure";
  }
  return "unknown";
}

TorusGrid TorusGrid::make(int d, int N, int M, double T, double L) {
  std::ostringstream err;
  if (d < 1 || d > kMaxDim) err << "d=" << d << " not in [1,3]; ";
  if (N < 8) err << "N=" << N << " < 8; ";
  if (M < 2) err << "M=" << M << " < 2; ";
  if (!(T > 0.0) || !std::isfinite(T)) err << "T=" << T << " must be positive; ";
  if (!(L > 0.0) || !std::isfinite(L)) err << "L=" << L << " must be positive; ";
  if (!err.str().empty()) throw LabError(Errc::invalid_argument, "TorusGrid: " + err.str());
  return TorusGrid{d, N, M, L, T};
}

double TorusGrid::cell_volume() const { return std::pow(dx(), d); }

std::size_t TorusGrid::nodes() const {
  std::size_t n = 1;
  for (int a = 0; a < d; ++a) n *= static_cast<std::size_t>(N);
  return n;
}

std::size_t TorusGrid::stride(int axis) const {
  std::size_t s = 1;
  for (int a = axis + 1; a < d; ++a) s *= static_cast<std::size_t>(N);
  return s;
}

Coords TorusGrid::coords(std::size_t node) const {
  Coords c{0, 0, 0};
  for (int a = d - 1; a >= 0; --a) {
    c[a] = static_cast<int>(node % N);
    node /= N;
  }
  return c;
}

std::size_t TorusGrid::index(const Coords& c) const {
  std::size_t idx = 0;
  for (int a = 0; a < d; ++a) {
    int ca = c[a] % N;
    if (ca < 0) ca += N;
    idx = idx * N + static_cast<std::size_t>(ca);
  }
  return idx;
}

Point TorusGrid::position(std::size_t node) const {
  const Coords c = coords(node);
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) x[a] = c[a] * dx();
  return x;
}

std::size_t TorusGrid::neighbor(std::size_t node, int axis, int shift) const {
  const std::size_t s = stride(axis);
  const int c = static_cast<int>((node / s) % N);
  int target = (c + shift) % N;
  if (target < 0) target += N;
  return node + (static_cast<std::ptrdiff_t>(target) - c) * static_cast<std::ptrdiff_t>(s);
}

std::size_t TorusGrid::nearest_node(const Point& x) const {
  Coords c{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    const double wrapped = x[a] - L * std::floor(x[a] / L);
    c[a] = static_cast<int>(std::lround(wrapped / dx())) % N;
  }
  return index(c);
}

double periodic_delta(double a, double b, double L) {
  double delta = std::fmod(a - b, L);
  if (delta >= 0.5 * L) delta -= L;
  if (delta < -0.5 * L) delta += L;
  return delta;
}

ScalarField::ScalarField(const TorusGrid& g, double fill) : grid(g), values(g.nodes(), fill) {}

ScalarField::ScalarField(const TorusGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.nodes())
    throw LabError(Errc::shape_mismatch, "ScalarField value count != N^d");
}

ScalarField ScalarField::sample(const TorusGrid& g, const std::function<double(const Point&)>& f) {
  ScalarField out(g);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(g.position(i));
  return out;
}

bool ScalarField::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

VectorField::VectorField(const TorusGrid& g, double fill) : grid(g), values(g.nodes() * g.d, fill) {}

VectorField VectorField::sample(const TorusGrid& g, const std::function<Point(const Point&)>& f) {
  VectorField out(g);
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const Point v = f(g.position(i));
    for (int a = 0; a < g.d; ++a) out.at(i, a) = v[a];
  }
  return out;
}

double VectorField::norm_sq(std::size_t node) const {
  double s = 0.0;
  for (int a = 0; a < grid.d; ++a) s += at(node, a) * at(node, a);
  return s;
}

bool VectorField::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

ScalarField laplacian(const ScalarField& u) {
  const TorusGrid& g = u.grid;
  const double inv_dx2 = 1.0 / (g.dx() * g.dx());
  ScalarField out(g);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double acc = 0.0;
    for (int a = 0; a < g.d; ++a)
      acc += u[g.neighbor(i, a, 1)] - 2.0 * u[i] + u[g.neighbor(i, a, -1)];
    out[i] = acc * inv_dx2;
  }
  return out;
}

VectorField gradient(const ScalarField& u) {
  const TorusGrid& g = u.grid;
  const double inv_2dx = 0.5 / g.dx();
  VectorField out(g);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (int a = 0; a < g.d; ++a)
      out.at(i, a) = (u[g.neighbor(i, a, 1)] - u[g.neighbor(i, a, -1)]) * inv_2dx;
  return out;
}

ScalarField divergence(const VectorField& v) {
  const TorusGrid& g = v.grid;
  const double inv_2dx = 0.5 / g.dx();
  ScalarField out(g);
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    double acc = 0.0;
    for (int a = 0; a < g.d; ++a) acc += v.at(g.neighbor(i, a, 1), a) - v.at(g.neighbor(i, a, -1), a);
    out[i] = acc * inv_2dx;
  }
  return out;
}

namespace {

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
  if (!(a == b)) throw LabError(Errc::shape_mismatch, std::string(where) + ": fields live on different grids");
}

double weighted_dot(std::span<const double> a, std::span<const double> b, double weight) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * weight;
}

}  // namespace

double inner_space(const ScalarField& u, const ScalarField& v) {
  require_same_grid(u.grid, v.grid, "inner_space");
  if (u.size() != v.size()) throw LabError(Errc::shape_mismatch, "inner_space: value counts differ");
  return weighted_dot(u.values, v.values, u.grid.cell_volume());
}

double inner_space(const VectorField& u, const VectorField& v) {
  require_same_grid(u.grid, v.grid, "inner_space");
  if (u.values.size() != v.values.size())
    throw LabError(Errc::shape_mismatch, "inner_space: value counts differ");
  return weighted_dot(u.values, v.values, u.grid.cell_volume());
}

template <class Field>
static double inner_spacetime_impl(std::span<const Field> u, std::span<const Field> v) {
  if (u.size() != v.size())
    throw LabError(Errc::shape_mismatch, "inner_spacetime: sequence lengths differ");
  if (u.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += inner_space(u[k], v[k]);
  return s * u.front().grid.dt();
}

double inner_spacetime(std::span<const ScalarField> u, std::span<const ScalarField> v) {
  return inner_spacetime_impl(u, v);
}

double inner_spacetime(std::span<const VectorField> u, std::span<const VectorField> v) {
  return inner_spacetime_impl(u, v);
}

double max_abs(const ScalarField& u) {
  double m = 0.0;
  for (double x : u.values) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(const ScalarField& u, const ScalarField& v) {
  require_same_grid(u.grid, v.grid, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
  return m;
}

}  // namespace burgerslab
