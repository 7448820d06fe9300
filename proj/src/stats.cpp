#include "burgerslab/stats.hpp"

#include <cmath>
#include <string>

#include "burgerslab/error.hpp"

namespace burgerslab {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleMoments sample_moments(std::span<const double> values) {
  SampleMoments m;
  m.count = values.size();
  if (values.empty()) return m;
  m.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() < 2) return m;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - m.mean) * (values[i] - m.mean);
  m.variance = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
  m.stderr_mean = std::sqrt(m.variance / static_cast<double>(values.size()));
  return m;
}

CovarianceEstimate sample_covariance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw LabError(Errc::shape_mismatch, "sample_covariance: need two equal-length samples of size >= 2");
  const SampleMoments ma = sample_moments(a);
  const SampleMoments mb = sample_moments(b);
  const std::size_t n = a.size();
  std::vector<double> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = (a[i] - ma.mean) * (b[i] - mb.mean);
  const SampleMoments mp = sample_moments(prod);
  CovarianceEstimate c;
  c.covariance = mp.mean * static_cast<double>(n) / static_cast<double>(n - 1);
  c.stderr_cov = mp.stderr_mean;
  const double denom = std::sqrt(ma.variance * mb.variance);
  c.correlation = denom > 0.0 ? c.covariance / denom : 0.0;
  return c;
}

double measure_order(std::span<const double> h, std::span<const double> gaps) {
  if (h.size() != gaps.size()) throw LabError(Errc::shape_mismatch, "measure_order: h and gaps differ in length");
  if (h.size() < 3) throw LabError(Errc::too_short, "measure_order needs at least 3 resolutions");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(gaps[i] > 0.0) || !std::isfinite(gaps[i]))
      throw LabError(Errc::non_positive, "measure_order: gap[" + std::to_string(i) + "]=" + std::to_string(gaps[i]));
    if (!(h[i] > 0.0)) throw LabError(Errc::non_positive, "measure_order: resolution must be positive");
  }
  const double n = static_cast<double>(h.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(gaps[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace burgerslab
