#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "spdelab/error.hpp"
#include "spdelab/stats.hpp"

using namespace spdelab;

namespace {

double normal_quantile(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(-40.0) == 0.0);
}

TEST_CASE("kolmogorov distribution tail") {
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(1.3580986393225507) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(kolmogorov_survival(1.6276236115189363) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(kolmogorov_survival(0.5) == doctest::Approx(0.963945).epsilon(1e-5));
  CHECK(kolmogorov_survival(0.2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kolmogorov_survival(10.0) < 1e-80);
}

TEST_CASE("ks statistic examples") {
  const std::vector<double> single{0.0};
  CHECK(ks_test(single).statistic == doctest::Approx(0.5));
  CHECK(ks_test(single).sample_size == 1);

  std::vector<double> quantiles;
  for (int i = 1; i <= 10; ++i) quantiles.push_back(normal_quantile((i - 0.5) / 10.0));
  const auto ks = ks_test(quantiles);
  CHECK(ks.statistic == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(ks.p_value > 0.99);

  std::vector<double> shifted(quantiles);
  for (auto& x : shifted) x += 3.0;
  CHECK(ks_test(shifted).p_value < 0.01);
  CHECK_THROWS_AS(ks_test(std::vector<double>{}), Error);
}

TEST_CASE("moments") {
  const auto ones = empirical_moments(std::vector<double>{1, 1, 1, 1});
  CHECK(ones.mean == 1.0);
  CHECK(ones.variance == 0.0);
  CHECK(std::isnan(ones.skewness));
  const auto pair = empirical_moments(std::vector<double>{-1, 1});
  CHECK(pair.mean == 0.0);
  CHECK(pair.variance == 2.0);
  const auto skewed = empirical_moments(std::vector<double>{0, 0, 0, 1, 10});
  CHECK(skewed.skewness > 1.0);
  CHECK_THROWS_AS(empirical_moments(std::vector<double>{1.0}), Error);
}

TEST_CASE("log-log slope") {
  std::vector<std::pair<double, double>> power;
  for (double x : {1.0, 2.0, 4.0, 8.0}) power.emplace_back(x, 4.0 / (x * x));
  const auto fit = loglog_slope(power);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.points.size() == 4);

  const std::vector<std::pair<double, double>> flat{{1, 3}, {5, 3}, {9, 3}};
  CHECK(loglog_slope(flat).slope == doctest::Approx(0.0));

  const std::vector<std::pair<double, double>> two{{1, 2}, {2, 1}};
  CHECK(loglog_slope(two).slope == doctest::Approx(-1.0).epsilon(1e-12));

  CHECK_THROWS_AS(loglog_slope(std::vector<std::pair<double, double>>{{1, 2}}), Error);
  CHECK_THROWS_AS(loglog_slope(std::vector<std::pair<double, double>>{{1, 2}, {2, 0}}), Error);
}
