#include "spdelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spdelab/error.hpp"

namespace spdelab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  constexpr int kTerms = 100;
  if (x < 1.0) {
    // Theta-function form of the CDF converges fast for small x.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * pi2 / (8.0 * x * x));
      cdf += term;
      if (term < 1e-300) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double p = 0.0;
  for (int k = 1; k <= kTerms; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> sample) {
  if (sample.empty()) fail(ErrorCode::InvalidArgument, "ks_test: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf(sorted[i]);
    const double below = static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n;
    d = std::max({d, above - cdf, cdf - below});
  }
  KsResult r;
  r.statistic = std::clamp(d, 0.0, 1.0);
  r.sample_size = sorted.size();
  r.p_value = kolmogorov_survival(std::sqrt(n) * r.statistic);
  return r;
}

Moments empirical_moments(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2) fail(ErrorCode::InvalidArgument, "empirical_moments: need at least 2 values");
  const double nn = static_cast<double>(n);
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= nn;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : sample) {
    const double c = x - mean;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
  }
  Moments out;
  out.mean = mean;
  out.variance = m2 / (nn - 1.0);
  m2 /= nn;
  m3 /= nn;
  m4 /= nn;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (n >= 4 && m2 > 0.0) {
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
  } else {
    out.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : nan;
    out.kurtosis = nan;
  }
  return out;
}

SlopeFit loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) fail(ErrorCode::InvalidArgument, "loglog_slope: need at least 2 points");
  std::vector<double> lx, ly;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      fail(ErrorCode::InvalidArgument, "loglog_slope: coordinates must be strictly positive");
    }
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::InvalidArgument, "loglog_slope: x values are all equal");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.points.assign(points.begin(), points.end());
  return fit;
}

}  // namespace spdelab
