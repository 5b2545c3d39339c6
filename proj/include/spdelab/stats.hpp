#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace spdelab {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t sample_size = 0;
};

double normal_cdf(double x);

// P(K > x) for the limiting Kolmogorov distribution.
double kolmogorov_survival(double x);

// One-sample KS test against the fully specified standard normal.
KsResult ks_test(std::span<const double> sample);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;  // NaN when undefined
  double kurtosis = 0.0;  // NaN when undefined; 3 for a normal
};

Moments empirical_moments(std::span<const double> sample);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
};

// Least-squares line through (log x, log y).
SlopeFit loglog_slope(std::span<const std::pair<double, double>> points);

}  // namespace spdelab
