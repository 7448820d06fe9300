#pragma once

#include <span>
#include <vector>

namespace burgerslab {

/// Recursive pairwise summation; the result depends only on the order of `values`.
double pairwise_sum(std::span<const double> values);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double stderr_mean = 0.0;
  std::size_t count = 0;
};

SampleMoments sample_moments(std::span<const double> values);

/// Unbiased sample covariance of paired samples and the standard error of
/// that estimate (spread of the centred products / sqrt(n)).
struct CovarianceEstimate {
  double covariance = 0.0;
  double stderr_cov = 0.0;
  double correlation = 0.0;
};

CovarianceEstimate sample_covariance(std::span<const double> a, std::span<const double> b);

/// Least-squares slope of log(gap) against log(h). Requires >= 3 points and
/// strictly positive gaps and resolutions.
double measure_order(std::span<const double> h, std::span<const double> gaps);

}  // namespace burgerslab
