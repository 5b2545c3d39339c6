#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace spdelab {

// Coefficients of dU + theta (-Laplacian)^beta U dt = sigma sum lambda_k^-gamma h_k dw_k
// on the box (0, pi)^d.
struct ModelParams {
  double theta0 = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double sigma = 1.0;
  int dimension = 1;
  // u_k(0); missing entries are zero.
  std::vector<double> initial_modes;

  double initial_value(std::size_t mode) const {
    return mode < initial_modes.size() ? initial_modes[mode] : 0.0;
  }

  // Throws InvalidArgument naming the offending field (prefixed by `scope`).
  // Returns warnings for violated hypotheses of the asymptotic theory.
  std::vector<std::string> validate(const std::string& scope = "model") const;
};

// Square roots of the Dirichlet Laplacian eigenvalues on (0, pi)^d, sorted.
struct EigenSequence {
  int dimension = 1;
  std::vector<double> lambdas;
  double varpi = 1.0;

  std::size_t size() const { return lambdas.size(); }
};

inline constexpr int kMaxDimension = 4;
inline constexpr std::size_t kMaxEigenCount = std::size_t{1} << 22;

// Integer multi-index of a box eigenfunction together with m_1^2 + ... + m_d^2.
// Unused trailing index slots are zero.
struct LatticeMode {
  unsigned long long norm2 = 0;
  std::array<int, kMaxDimension> index{};
};

// First `count` modes ordered by norm, ties by lexicographic multi-index.
std::vector<LatticeMode> enumerate_lattice_modes(int dimension, std::size_t count);

EigenSequence build_eigensequence(int dimension, std::size_t count);

// (2^d / V_d)^{2/d}, the limit of lambda_k^2 k^{-2/d} on the box.
double weyl_constant(int dimension);

double spectral_sum(const EigenSequence& eigs, double power, std::size_t count);

// Closed-form moments of a mode started at zero.
double second_moment(const ModelParams& params, double lambda, double t);
double fourth_moment(const ModelParams& params, double lambda, double t);
double covariance(const ModelParams& params, double lambda, double t, double s);

double fisher_information(const ModelParams& params, const EigenSequence& eigs,
                          std::size_t n_modes, double horizon);
double fisher_information_asymptotic(const ModelParams& params, std::size_t n_modes,
                                     double horizon);

// 1 - exp(-x), accurate for small x.
inline double one_minus_exp_neg(double x) { return -std::expm1(-x); }

// lambda^{2 beta} theta0, the decay rate of mode lambda.
double decay_rate(const ModelParams& params, double lambda);

}  // namespace spdelab
