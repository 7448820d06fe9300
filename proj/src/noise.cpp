#include "burgerslab/noise.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>

#include "burgerslab/error.hpp"
#include "burgerslab/random.hpp"

namespace burgerslab {

double bump_profile(double r2) {
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

namespace {

constexpr int kRadialPanels = 200000;

// S_{d-1} * integral_0^1 r^{d-1} g(r) dr by composite Simpson.
template <class G>
double radial_integral(int d, G g) {
  const double h = 1.0 / kRadialPanels;
  auto integrand = [&](double r) { return std::pow(r, d - 1) * g(r); };
  double sum = integrand(0.0) + integrand(1.0);
  for (int i = 1; i < kRadialPanels; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
  const double sphere = d == 1 ? 2.0 : d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
  return sphere * sum * h / 3.0;
}

struct BumpConstants {
  double normalization;
  double l2_sq;
};

const BumpConstants& bump_constants(int d) {
  if (d < 1 || d > kMaxDim) throw LabError(Errc::dimension, "bump constants need d in [1,3]");
  static std::array<BumpConstants, kMaxDim> cache{};
  static std::once_flag once;
  std::call_once(once, [] {
    for (int dim = 1; dim <= kMaxDim; ++dim) {
      const double mass = radial_integral(dim, [](double r) { return bump_profile(r * r); });
      const double sq = radial_integral(dim, [](double r) {
        const double b = bump_profile(r * r);
        return b * b;
      });
      const double c = 1.0 / mass;
      cache[dim - 1] = {c, c * c * sq};
    }
  });
  return cache[d - 1];
}

double norm_sq(const Point& x, int d) {
  double s = 0.0;
  for (int a = 0; a < d; ++a) s += x[a] * x[a];
  return s;
}

}  // namespace

double bump_normalization(int d) { return bump_constants(d).normalization; }
double bump_l2_sq(int d) { return bump_constants(d).l2_sq; }

double unit_bump_1d(double s) { return bump_normalization(1) * bump_profile(s * s); }

Mollifier Mollifier::bump(const TorusGrid& grid, int scale_n) {
  if (scale_n < 1) throw LabError(Errc::invalid_argument, "mollifier scale n must be >= 1");
  const double radius = 1.0 / scale_n;
  if (2.0 * radius >= grid.L)
    throw LabError(Errc::invalid_argument, "mollifier support diameter 2/n must be < L");
  Mollifier m;
  m.grid_ = grid;
  m.scale_n_ = scale_n;
  m.support_radius_ = radius;
  m.rho_l2_sq_ = bump_l2_sq(grid.d);
  m.c_n_continuum_ = m.rho_l2_sq_ * std::pow(static_cast<double>(scale_n), grid.d);

  const double dx = grid.dx();
  const double vol = grid.cell_volume();
  const int reach = static_cast<int>(std::ceil(radius / dx));
  Coords o{0, 0, 0};
  double sum = 0.0;
  double sum_sq = 0.0;
  // Enumerate the cube [-reach, reach]^d and keep taps inside the support.
  const int width = 2 * reach + 1;
  int total = 1;
  for (int a = 0; a < grid.d; ++a) total *= width;
  for (int t = 0; t < total; ++t) {
    int rem = t;
    Point x{0.0, 0.0, 0.0};
    for (int a = grid.d - 1; a >= 0; --a) {
      o[a] = rem % width - reach;
      rem /= width;
      x[a] = o[a] * dx;
    }
    const double rho = m.density(x);
    if (rho <= 0.0) continue;
    m.stencil_.push_back({o, vol * rho});
    sum += rho;
    sum_sq += rho * rho;
  }
  m.grid_mass_ = vol * sum;
  m.c_n_discrete_ = vol * sum_sq;
  return m;
}

Mollifier Mollifier::grid_delta(const TorusGrid& grid) {
  Mollifier m;
  m.grid_ = grid;
  m.scale_n_ = 0;
  m.support_radius_ = 0.0;
  m.rho_l2_sq_ = 0.0;
  m.c_n_discrete_ = 1.0 / grid.cell_volume();
  m.c_n_continuum_ = m.c_n_discrete_;
  m.grid_mass_ = 1.0;
  m.stencil_.push_back({Coords{0, 0, 0}, 1.0});
  return m;
}

double Mollifier::density(const Point& x) const {
  if (is_grid_delta()) throw LabError(Errc::invalid_argument, "grid delta has no continuum density");
  const int d = grid_.d;
  const double n = scale_n_;
  Point scaled{0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) scaled[a] = n * x[a];
  return std::pow(n, d) * bump_normalization(d) * bump_profile(norm_sq(scaled, d));
}

bool Mollifier::resolved() const {
  if (is_grid_delta()) return true;
  return support_radius_ >= 4.0 * grid_.dx() * (1.0 - 1e-12);
}

std::vector<double> convolve(std::span<const double> values, const Mollifier& m) {
  const TorusGrid& g = m.grid();
  if (values.size() != g.nodes()) throw LabError(Errc::shape_mismatch, "convolve: value count != N^d");
  const int N = g.N;
  const int d = g.d;
  const std::size_t rows = g.nodes() / N;
  std::vector<double> out(values.size(), 0.0);
  for (const StencilTap& tap : m.stencil()) {
    const double w = tap.weight;
    int shift = tap.offset[d - 1] % N;
    if (shift < 0) shift += N;
    for (std::size_t row = 0; row < rows; ++row) {
      // Wrapped source row for the outer axes.
      std::size_t src_row = 0;
      std::size_t rem = row;
      std::size_t scale = 1;
      for (int a = d - 2; a >= 0; --a) {
        int c = static_cast<int>(rem % N) + tap.offset[a];
        rem /= N;
        c %= N;
        if (c < 0) c += N;
        src_row += static_cast<std::size_t>(c) * scale;
        scale *= N;
      }
      const double* src = values.data() + src_row * N;
      double* dst = out.data() + row * N;
      const int split = N - shift;
      for (int c = 0; c < split; ++c) dst[c] += w * src[c + shift];
      for (int c = split; c < N; ++c) dst[c] += w * src[c - split];
    }
  }
  return out;
}

ScalarField convolve(const ScalarField& u, const Mollifier& m) {
  if (!(u.grid == m.grid())) throw LabError(Errc::shape_mismatch, "convolve: grid differs from mollifier grid");
  return ScalarField(u.grid, convolve(std::span<const double>(u.values), m));
}

namespace {

// Tensor composite Simpson of g over the box prod_a [lo_a, lo_a + panels * step_a].
template <class G>
double box_simpson(int d, int panels, const std::array<double, kMaxDim>& lo,
                   const std::array<double, kMaxDim>& step, G g) {
  auto weight_of = [panels](int i) { return (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  const int pts = panels + 1;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= pts;
  double sum = 0.0;
  Point u{0.0, 0.0, 0.0};
  for (std::size_t t = 0; t < total; ++t) {
    std::size_t rem = t;
    double weight = 1.0;
    for (int a = d - 1; a >= 0; --a) {
      const int i = static_cast<int>(rem % pts);
      rem /= pts;
      u[a] = lo[a] + i * step[a];
      weight *= weight_of(i);
    }
    const double v = g(u);
    if (v != 0.0) sum += weight * v;
  }
  double factor = 1.0;
  for (int a = 0; a < d; ++a) factor *= step[a] / 3.0;
  return factor * sum;
}

int box_panels(int d) { return d == 1 ? 20000 : d == 2 ? 800 : 160; }

}  // namespace

double mass_quadrature(const Mollifier& m) {
  if (m.is_grid_delta()) return 1.0;
  const int d = m.grid().d;
  const int panels = box_panels(d);
  const double r = m.support_radius();
  std::array<double, kMaxDim> lo{}, step{};
  for (int a = 0; a < d; ++a) {
    lo[a] = -r;
    step[a] = 2.0 * r / panels;
  }
  return box_simpson(d, panels, lo, step, [&](const Point& x) { return m.density(x); });
}

double h_eval(const Mollifier& m, const Point& z) {
  if (m.is_grid_delta()) throw LabError(Errc::invalid_argument, "h_eval: grid delta has no continuum covariance");
  const int d = m.grid().d;
  const double n = m.scale_n();
  const double shift = n * std::sqrt(norm_sq(z, d));
  if (shift >= 2.0) return 0.0;

  // h_n(z) = n^d h_1(n |z| e_0); integrate rho(u) rho(u + w) over the overlap box.
  const int panels = box_panels(d);
  std::array<double, kMaxDim> lo{}, step{};
  for (int a = 0; a < d; ++a) {
    const double w = a == 0 ? shift : 0.0;
    lo[a] = std::max(-1.0, -1.0 - w);
    const double hi = std::min(1.0, 1.0 - w);
    step[a] = (hi - lo[a]) / panels;
  }
  const double c = bump_normalization(d);
  const double integral = box_simpson(d, panels, lo, step, [&](const Point& u) {
    Point v = u;
    v[0] += shift;
    return bump_profile(norm_sq(u, d)) * bump_profile(norm_sq(v, d));
  });
  return c * c * std::pow(n, d) * integral;
}

WhiteNoiseRealization sample_noise(const TorusGrid& grid, std::uint64_t seed, double lambda) {
  WhiteNoiseRealization noise{grid, seed, lambda, {}};
  const std::size_t nodes = grid.nodes();
  noise.increments.resize(nodes * grid.M);
  const double scale = lambda * std::sqrt(grid.dt() / grid.cell_volume());
  for (int k = 0; k < grid.M; ++k) {
    NormalSource normal(Stream::noise, seed, static_cast<std::uint64_t>(k));
    double* out = noise.increments.data() + static_cast<std::size_t>(k) * nodes;
    for (std::size_t i = 0; i < nodes; ++i) out[i] = scale * normal();
  }
  return noise;
}

namespace {

double weighted_pairing(const TorusGrid& grid, std::span<const double> increments,
                        std::span<const double> xi) {
  if (xi.size() != increments.size())
    throw LabError(Errc::shape_mismatch, "pair: xi must have M * N^d samples");
  double s = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j) s += xi[j] * increments[j];
  return s * grid.cell_volume();
}

}  // namespace

double pair(const WhiteNoiseRealization& noise, std::span<const double> xi) {
  return weighted_pairing(noise.grid, noise.increments, xi);
}

double pair(const MollifiedNoise& noise, std::span<const double> xi) {
  return weighted_pairing(noise.grid(), noise.increments, xi);
}

MollifiedNoise mollify(std::shared_ptr<const WhiteNoiseRealization> noise, const Mollifier& m) {
  if (!noise) throw LabError(Errc::invalid_argument, "mollify: null noise");
  if (!(noise->grid.d == m.grid().d && noise->grid.N == m.grid().N && noise->grid.L == m.grid().L))
    throw LabError(Errc::shape_mismatch, "mollify: mollifier built for a different spatial grid");
  if (!m.resolved())
    throw LabError(Errc::under_resolved, "support radius 1/n=" + std::to_string(m.support_radius()) +
                                             " < 4 dx=" + std::to_string(4.0 * noise->grid.dx()));
  MollifiedNoise out{noise, m, {}};
  const TorusGrid& g = noise->grid;
  out.increments.resize(noise->increments.size());
  for (int k = 0; k < g.M; ++k) {
    const std::vector<double> slice = convolve(noise->slice(k), m);
    std::copy(slice.begin(), slice.end(), out.increments.begin() + static_cast<std::ptrdiff_t>(k * g.nodes()));
  }
  return out;
}

std::vector<double> wiener_path(const MollifiedNoise& mn, std::size_t node) {
  const TorusGrid& g = mn.grid();
  if (node >= g.nodes()) throw LabError(Errc::off_grid, "wiener_path: node index out of range");
  std::vector<double> path(g.M + 1, 0.0);
  for (int k = 0; k < g.M; ++k) path[k + 1] = path[k] + mn.slice(k)[node];
  return path;
}

std::vector<double> wiener_path(const MollifiedNoise& mn, const Point& x) {
  const TorusGrid& g = mn.grid();
  for (int a = 0; a < g.d; ++a) {
    const double cells = x[a] / g.dx();
    if (std::abs(cells - std::round(cells)) > 1e-9)
      throw LabError(Errc::off_grid, "wiener_path: point is not a grid node");
  }
  return wiener_path(mn, g.nearest_node(x));
}

double quadratic_variation(std::span<const double> path) {
  if (path.size() < 2) throw LabError(Errc::too_short, "quadratic_variation needs at least 2 samples");
  double qv = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double inc = path[k] - path[k - 1];
    qv += inc * inc;
  }
  return qv;
}

WhiteNoiseRealization coarse_grain(const WhiteNoiseRealization& noise, int space_factor, int time_factor) {
  const TorusGrid& fine = noise.grid;
  if (space_factor < 1 || time_factor < 1 || fine.N % space_factor != 0 || fine.M % time_factor != 0)
    throw LabError(Errc::non_divisible, "coarse_grain: factors (" + std::to_string(space_factor) + ", " +
                                            std::to_string(time_factor) + ") must divide N=" +
                                            std::to_string(fine.N) + " and M=" + std::to_string(fine.M));
  const TorusGrid coarse =
      TorusGrid::make(fine.d, fine.N / space_factor, fine.M / time_factor, fine.T, fine.L);
  WhiteNoiseRealization out{coarse, noise.seed, noise.lambda, {}};
  const std::size_t coarse_nodes = coarse.nodes();
  out.increments.assign(coarse_nodes * coarse.M, 0.0);
  const double average = 1.0 / std::pow(static_cast<double>(space_factor), fine.d);
  for (int k = 0; k < fine.M; ++k) {
    double* dst = out.increments.data() + static_cast<std::size_t>(k / time_factor) * coarse_nodes;
    const std::span<const double> src = noise.slice(k);
    for (std::size_t i = 0; i < fine.nodes(); ++i) {
      Coords c = fine.coords(i);
      for (int a = 0; a < fine.d; ++a) c[a] /= space_factor;
      dst[coarse.index(c)] += average * src[i];
    }
  }
  return out;
}

namespace {

template <class T>
void put_le(std::ofstream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::ifstream& is, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw LabError(Errc::io, "truncated lattice file " + path.string());
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_lattice_file(const std::filesystem::path& path, const LatticeFileHeader& header,
                        std::span<const double> payload) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw LabError(Errc::io, "cannot open " + path.string() + " for writing");
  put_le<std::int64_t>(os, header.grid.d);
  put_le<std::int64_t>(os, header.grid.N);
  put_le<std::int64_t>(os, header.grid.M);
  put_le<double>(os, header.grid.L);
  put_le<double>(os, header.grid.T);
  put_le<std::uint64_t>(os, header.seed);
  put_le<double>(os, header.lambda);
  for (double v : payload) put_le<double>(os, v);
  if (!os) throw LabError(Errc::io, "write failed for " + path.string());
}

std::vector<double> read_lattice_file(const std::filesystem::path& path, LatticeFileHeader& header) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LabError(Errc::io, "cannot open " + path.string());
  const auto d = get_le<std::int64_t>(is, path);
  const auto N = get_le<std::int64_t>(is, path);
  const auto M = get_le<std::int64_t>(is, path);
  const double L = get_le<double>(is, path);
  const double T = get_le<double>(is, path);
  header.seed = get_le<std::uint64_t>(is, path);
  header.lambda = get_le<double>(is, path);
  header.grid = TorusGrid::make(static_cast<int>(d), static_cast<int>(N), static_cast<int>(M), T, L);
  std::vector<double> payload;
  while (is.peek() != std::ifstream::traits_type::eof()) payload.push_back(get_le<double>(is, path));
  return payload;
}

void save_noise(const std::filesystem::path& path, const WhiteNoiseRealization& noise) {
  write_lattice_file(path, {noise.grid, noise.seed, noise.lambda}, noise.increments);
}

WhiteNoiseRealization load_noise(const std::filesystem::path& path) {
  LatticeFileHeader header;
  std::vector<double> payload = read_lattice_file(path, header);
  if (payload.size() != header.grid.nodes() * header.grid.M)
    throw LabError(Errc::io, "noise file " + path.string() + " has wrong payload size");
  return {header.grid, header.seed, header.lambda, std::move(payload)};
}

}  // namespace burgerslab
