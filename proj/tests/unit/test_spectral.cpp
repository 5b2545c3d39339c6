#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "spdelab/error.hpp"
#include "spdelab/spectral_model.hpp"

using namespace spdelab;

namespace {

std::vector<double> brute_force(int d, int bound, std::size_t count) {
  std::vector<double> norms;
  std::vector<int> m(d, 1);
  while (true) {
    double s = 0.0;
    for (int v : m) s += static_cast<double>(v) * v;
    norms.push_back(std::sqrt(s));
    int i = 0;
    while (i < d && ++m[i] > bound) m[i++] = 1;
    if (i == d) break;
  }
  std::sort(norms.begin(), norms.end());
  norms.resize(count);
  return norms;
}

ModelParams unit_model(double theta0, double beta, double gamma, double sigma, int d = 1) {
  ModelParams p;
  p.theta0 = theta0;
  p.beta = beta;
  p.gamma = gamma;
  p.sigma = sigma;
  p.dimension = d;
  return p;
}

}  // namespace

TEST_CASE("eigensequence examples") {
  const auto d1 = build_eigensequence(1, 4);
  CHECK(d1.lambdas == std::vector<double>{1, 2, 3, 4});

  const auto d2 = build_eigensequence(2, 5);
  const std::vector<double> expected2{1.41421, 2.23607, 2.23607, 2.82843, 3.16228};
  REQUIRE(d2.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(d2.lambdas[k] == doctest::Approx(expected2[k]).epsilon(1e-5));

  const auto d3 = build_eigensequence(3, 4);
  const std::vector<double> expected3{1.73205, 2.44949, 2.44949, 2.44949};
  for (std::size_t k = 0; k < 4; ++k) CHECK(d3.lambdas[k] == doctest::Approx(expected3[k]).epsilon(1e-5));
}

TEST_CASE("eigensequence matches brute-force enumeration") {
  for (int d = 1; d <= 4; ++d) {
    const std::size_t count = d == 1 ? 200 : 500;
    const int bound = d == 1 ? 400 : (d == 2 ? 60 : (d == 3 ? 20 : 12));
    const auto eigs = build_eigensequence(d, count);
    const auto oracle = brute_force(d, bound, count);
    CAPTURE(d);
    REQUIRE(eigs.size() == count);
    for (std::size_t k = 0; k < count; ++k) CHECK(eigs.lambdas[k] == doctest::Approx(oracle[k]).epsilon(1e-14));
  }
}

TEST_CASE("eigensequence is nondecreasing and positive") {
  const auto eigs = build_eigensequence(3, 20000);
  CHECK(eigs.lambdas.front() > 0.0);
  CHECK(std::is_sorted(eigs.lambdas.begin(), eigs.lambdas.end()));
}

TEST_CASE("lattice modes are ordered with lexicographic tie-break") {
  const auto modes = enumerate_lattice_modes(3, 4);
  REQUIRE(modes.size() == 4);
  CHECK(modes[0].norm2 == 3);
  CHECK(modes[1].index == std::array<int, 4>{1, 1, 2, 0});
  CHECK(modes[2].index == std::array<int, 4>{1, 2, 1, 0});
  CHECK(modes[3].index == std::array<int, 4>{2, 1, 1, 0});
}

TEST_CASE("eigensequence rejects bad arguments") {
  CHECK_THROWS_AS(build_eigensequence(5, 3), Error);
  CHECK_THROWS_AS(build_eigensequence(0, 3), Error);
  CHECK_THROWS_AS(build_eigensequence(1, 0), Error);
  CHECK_THROWS_AS(build_eigensequence(2, kMaxEigenCount + 1), Error);
  try {
    build_eigensequence(5, 3);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unsupported);
  }
}

TEST_CASE("weyl constant") {
  CHECK(weyl_constant(1) == doctest::Approx(1.0));
  CHECK(weyl_constant(2) == doctest::Approx(4.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(weyl_constant(3) == doctest::Approx(std::pow(6.0 / std::numbers::pi, 2.0 / 3.0)).epsilon(1e-12));
  CHECK(weyl_constant(3) == doctest::Approx(1.53930).epsilon(1e-4));
  CHECK_THROWS_AS(weyl_constant(5), Error);
}

TEST_CASE("weyl ratio on the enumerated spectrum") {
  // Counting oracle at k = 1e4.
  const std::size_t k = 10000;
  const auto e1 = build_eigensequence(1, k);
  CHECK(e1.lambdas.back() * e1.lambdas.back() / std::pow(k, 2.0) == doctest::Approx(e1.varpi));
  const auto e2 = build_eigensequence(2, k);
  CHECK(e2.lambdas.back() * e2.lambdas.back() / static_cast<double>(k) / e2.varpi ==
        doctest::Approx(1.0).epsilon(0.015));
  const auto e3 = build_eigensequence(3, k);
  const double r3 = e3.lambdas.back() * e3.lambdas.back() * std::pow(k, -2.0 / 3.0) / e3.varpi;
  CHECK(std::abs(r3 - 1.0) < 0.10);
  // The Dirichlet boundary term keeps the d=3 ratio near 1.12 at k = 1000.
  const auto small2 = build_eigensequence(2, 1000);
  CHECK(std::abs(small2.lambdas.back() * small2.lambdas.back() / 1000.0 / small2.varpi - 1.0) < 0.10);
}

TEST_CASE("spectral sums") {
  const auto d1 = build_eigensequence(1, 10);
  CHECK(spectral_sum(d1, 2.0, 3) == doctest::Approx(14.0));
  CHECK(spectral_sum(d1, 0.0, 7) == doctest::Approx(7.0));
  const auto d2 = build_eigensequence(2, 5);
  CHECK(spectral_sum(d2, 2.0, 3) == doctest::Approx(12.0));
  CHECK_THROWS_AS(spectral_sum(d2, 2.0, 6), Error);
}

TEST_CASE("second and fourth moments") {
  const auto p = unit_model(0.5, 0.7, 1.3, 1.0);
  CHECK(second_moment(p, 1.0, 1e9) == doctest::Approx(1.0));
  CHECK(second_moment(p, 1.0, 1.0) == doctest::Approx(0.632121).epsilon(1e-6));
  CHECK(second_moment(p, 1.0, 0.0) == 0.0);
  CHECK(fourth_moment(p, 1.0, 1e9) == doctest::Approx(3.0));
  CHECK(fourth_moment(p, 1.0, 0.0) == 0.0);
}

TEST_CASE("covariance") {
  const auto p = unit_model(1.0, 0.8, 0.0, 1.0);
  CHECK(covariance(p, 1.0, 1.0, 2.0) == doctest::Approx(0.159046).epsilon(1e-6));
  CHECK(covariance(p, 1.0, 2.0, 1.0) == doctest::Approx(0.159046).epsilon(1e-6));
  CHECK(covariance(p, 1.0, 0.0, 3.0) == 0.0);

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int i = 0; i < 100; ++i) {
    const auto q = unit_model(u(gen), u(gen), u(gen), u(gen));
    const double lambda = u(gen);
    const double t = u(gen);
    CHECK(covariance(q, lambda, t, t) == doctest::Approx(second_moment(q, lambda, t)).epsilon(1e-12));
  }
}

TEST_CASE("fisher information") {
  const auto p = unit_model(0.5, 1.0, 1.0, 1.0);
  const auto eigs = build_eigensequence(1, 10);
  CHECK(fisher_information(p, eigs, 1, 2.0) == doctest::Approx(1.135335).epsilon(1e-6));
  CHECK(fisher_information(p, eigs, 1, 1e-4) < 1e-6);
  CHECK(fisher_information(p, eigs, 1, 1e-4) > 0.0);

  const auto q = unit_model(1.0, 1.0, 1.0, 1.0);
  const double ratio =
      fisher_information(q, eigs, 10, 100.0) / (100.0 * spectral_sum(eigs, 2.0, 10) / 2.0);
  CHECK(ratio == doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(fisher_information(q, eigs, 11, 1.0), Error);
}

TEST_CASE("fisher information does not depend on sigma or gamma") {
  const auto eigs = build_eigensequence(2, 50);
  const auto a = unit_model(0.7, 0.9, 1.1, 1.0, 2);
  const auto b = unit_model(0.7, 0.9, 3.0, 4.0, 2);
  CHECK(fisher_information(a, eigs, 50, 3.0) == doctest::Approx(fisher_information(b, eigs, 50, 3.0)));
}

TEST_CASE("asymptotic fisher information") {
  CHECK(fisher_information_asymptotic(unit_model(1.0, 1.0, 1.0, 1.0), 10, 6.0) == doctest::Approx(1000.0));
  const auto p = unit_model(1.0, 0.6, 0.6, 1.0);
  const auto eigs = build_eigensequence(1, 2000);
  const double ratio = fisher_information(p, eigs, 2000, 100.0) / fisher_information_asymptotic(p, 2000, 100.0);
  CHECK(ratio == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("model validation") {
  auto p = unit_model(1.0, 0.6, 0.6, 1.0);
  CHECK(p.validate().empty());
  p.theta0 = -1.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("model.theta0"), Error);
  p = unit_model(1.0, 0.4, 0.6, 1.0);
  const auto warnings = p.validate();
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("1/2") != std::string::npos);
  p = unit_model(1.0, 0.6, 0.3, 1.0);
  CHECK(p.validate().size() == 1);
  p = unit_model(1.0, 0.6, 0.6, -0.1);
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("model.sigma"), Error);
  p = unit_model(1.0, 0.6, 0.6, 1.0, 5);
  CHECK_THROWS_AS(p.validate(), Error);
}
