#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "spdelab/simulator.hpp"
#include "spdelab/spectral_model.hpp"

namespace spdelab {

enum class EstimatorKind { Continuous, Discrete };
enum class NumeratorMode { ItoIdentity, FineRiemann };
enum class DenominatorRule { Trapezoid, LeftPoint };

const char* to_string(EstimatorKind kind) noexcept;

// Components of the discretized estimator error:
//   theta_tilde - theta0 = (theta0 V - sigma Y_coarse) / I_coarse.
struct DecompositionTerms {
  double y_coarse = 0.0;
  double y_fine = 0.0;
  double i_coarse = 0.0;
  double i_fine = 0.0;
  double v = 0.0;
};

struct EstimateRecord {
  EstimatorKind kind = EstimatorKind::Discrete;
  double theta_hat = 0.0;
  double z_score = 0.0;
  double theoretical_std = 0.0;
  std::size_t modes = 0;
  std::size_t observations = 0;
  double horizon = 0.0;
  std::optional<DecompositionTerms> terms;
  std::optional<Provenance> provenance;
};

// Per-mode building blocks. They are unweighted so experiments can stream a
// mode at a time and still reproduce the whole-ensemble result bit for bit.
struct RatioSums {
  double numerator = 0.0;
  double denominator = 0.0;
};

// sum_i u(t_{i-1}) (u(t_i) - u(t_{i-1})) and sum_i u(t_{i-1})^2 dt over
// `steps` coarse steps, reading every `stride`-th entry of `path`.
RatioSums discrete_mode_sums(std::span<const double> path, std::size_t stride,
                             std::size_t steps, double dt);

struct ContinuousSums {
  double ito_numerator = 0.0;
  double riemann_numerator = 0.0;
  double trapezoid = 0.0;
  double left_point = 0.0;
};

// `noise_variance_rate` is sigma^2 lambda^{-2 gamma}.
ContinuousSums continuous_mode_sums(std::span<const double> path, double delta,
                                    double noise_variance_rate);

DecompositionTerms decomposition_mode_terms(std::span<const double> path,
                                            std::span<const double> increments,
                                            std::size_t stride, double delta);

// Weighted mode-by-mode reduction into theta = -numerator / denominator.
class MleAccumulator {
 public:
  MleAccumulator(const ModelParams& params) : params_(params) {}

  void add(double lambda, double numerator, double denominator);
  double estimate() const;

 private:
  ModelParams params_;
  double numerator_ = 0.0;
  double denominator_ = 0.0;
};

// Weighted mode-by-mode reduction of decomposition terms.
class TermsAccumulator {
 public:
  TermsAccumulator(const ModelParams& params) : params_(params) {}

  void add(double lambda, const DecompositionTerms& mode_terms);
  const DecompositionTerms& terms() const { return total_; }

 private:
  ModelParams params_;
  DecompositionTerms total_;
};

EstimateRecord mle_discrete(const ObservationMatrix& obs, const ModelParams& params,
                            const EigenSequence& eigs);

EstimateRecord mle_continuous(const PathEnsemble& ensemble, const ModelParams& params,
                              const EigenSequence& eigs,
                              NumeratorMode numerator = NumeratorMode::ItoIdentity,
                              DenominatorRule denominator = DenominatorRule::Trapezoid);

DecompositionTerms decomposition_terms(const PathEnsemble& ensemble, const ModelParams& params,
                                       const EigenSequence& eigs);

// (varpi^beta / ((4 beta / d + 2) theta0))^{1/2}
double upsilon(const ModelParams& params, double varpi);

// Upsilon sqrt(T) N^{beta/d + 1/2}
double normalization_rate(const ModelParams& params, double varpi, std::size_t n_modes,
                          double horizon);

double normalize_error(double theta_hat, const ModelParams& params, double varpi,
                       std::size_t n_modes, double horizon);

double theoretical_std(const ModelParams& params, double varpi, std::size_t n_modes,
                       double horizon);

}  // namespace spdelab
