#include "spdelab/estimators.hpp"

#include <cmath>
#include <sstream>

#include "spdelab/error.hpp"

namespace spdelab {
namespace {

void check_modes(std::size_t n_modes, const EigenSequence& eigs, const char* who) {
  if (n_modes == 0) fail(ErrorCode::InvalidArgument, std::string(who) + ": no modes");
  if (n_modes > eigs.size()) {
    std::ostringstream msg;
    msg << who << ": " << n_modes << " modes but only " << eigs.size() << " eigenvalues";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
}

}  // namespace

const char* to_string(EstimatorKind kind) noexcept {
  return kind == EstimatorKind::Continuous ? "continuous" : "discrete";
}

RatioSums discrete_mode_sums(std::span<const double> path, std::size_t stride,
                             std::size_t steps, double dt) {
  RatioSums sums;
  double squares = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double prev = path[(i - 1) * stride];
    const double next = path[i * stride];
    sums.numerator += prev * (next - prev);
    squares += prev * prev;
  }
  sums.denominator = squares * dt;
  return sums;
}

ContinuousSums continuous_mode_sums(std::span<const double> path, double delta,
                                    double noise_variance_rate) {
  ContinuousSums sums;
  const std::size_t steps = path.size() - 1;
  const double horizon = delta * static_cast<double>(steps);
  double squares = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double prev = path[i - 1];
    sums.riemann_numerator += prev * (path[i] - prev);
    squares += prev * prev;
  }
  const double first = path.front();
  const double last = path.back();
  sums.left_point = squares * delta;
  sums.trapezoid = (squares - 0.5 * first * first + 0.5 * last * last) * delta;
  sums.ito_numerator = 0.5 * (last * last - first * first - noise_variance_rate * horizon);
  return sums;
}

DecompositionTerms decomposition_mode_terms(std::span<const double> path,
                                            std::span<const double> increments,
                                            std::size_t stride, double delta) {
  DecompositionTerms t;
  const std::size_t fine_steps = increments.size();
  const std::size_t coarse_steps = fine_steps / stride;
  const double dt = delta * static_cast<double>(stride);
  double coarse_squares = 0.0;
  double fine_squares = 0.0;
  for (std::size_t i = 0; i < coarse_steps; ++i) {
    const std::size_t base = i * stride;
    const double anchor = path[base];
    double coarse_dw = 0.0;
    double excess = 0.0;  // trapezoid of u - u(t_{i-1}) over the sub-grid
    for (std::size_t j = 0; j < stride; ++j) {
      const double u = path[base + j];
      const double dw = increments[base + j];
      coarse_dw += dw;
      t.y_fine += u * dw;
      fine_squares += u * u;
      excess += 0.5 * ((u - anchor) + (path[base + j + 1] - anchor));
    }
    t.y_coarse += anchor * coarse_dw;
    coarse_squares += anchor * anchor;
    t.v += anchor * excess * delta;
  }
  const double first = path.front();
  const double last = path[fine_steps];
  t.i_coarse = coarse_squares * dt;
  t.i_fine = (fine_squares - 0.5 * first * first + 0.5 * last * last) * delta;
  return t;
}

void MleAccumulator::add(double lambda, double numerator, double denominator) {
  numerator_ += std::pow(lambda, 2.0 * params_.beta + 2.0 * params_.gamma) * numerator;
  denominator_ += std::pow(lambda, 4.0 * params_.beta + 2.0 * params_.gamma) * denominator;
}

double MleAccumulator::estimate() const {
  if (!(denominator_ > 0.0)) {
    fail(ErrorCode::ZeroDenominator,
         "ZeroDenominator: the observed paths are identically zero before the final time; "
         "the sample is degenerate and carries no information about theta");
  }
  return -numerator_ / denominator_;
}

void TermsAccumulator::add(double lambda, const DecompositionTerms& m) {
  const double wy = std::pow(lambda, 2.0 * params_.beta + params_.gamma);
  const double wi = std::pow(lambda, 4.0 * params_.beta + 2.0 * params_.gamma);
  total_.y_coarse += wy * m.y_coarse;
  total_.y_fine += wy * m.y_fine;
  total_.i_coarse += wi * m.i_coarse;
  total_.i_fine += wi * m.i_fine;
  total_.v += wi * m.v;
}

EstimateRecord mle_discrete(const ObservationMatrix& obs, const ModelParams& params,
                            const EigenSequence& eigs) {
  check_modes(obs.modes, eigs, "mle_discrete");
  MleAccumulator acc(params);
  const double dt = obs.step();
  for (std::size_t k = 0; k < obs.modes; ++k) {
    const auto s = discrete_mode_sums(obs.row(k), 1, obs.observations, dt);
    acc.add(eigs.lambdas[k], s.numerator, s.denominator);
  }
  EstimateRecord rec;
  rec.kind = EstimatorKind::Discrete;
  rec.theta_hat = acc.estimate();
  rec.modes = obs.modes;
  rec.observations = obs.observations;
  rec.horizon = obs.horizon;
  rec.z_score = normalize_error(rec.theta_hat, params, eigs.varpi, obs.modes, obs.horizon);
  rec.theoretical_std = theoretical_std(params, eigs.varpi, obs.modes, obs.horizon);
  return rec;
}

EstimateRecord mle_continuous(const PathEnsemble& ensemble, const ModelParams& params,
                              const EigenSequence& eigs, NumeratorMode numerator,
                              DenominatorRule denominator) {
  check_modes(ensemble.modes(), eigs, "mle_continuous");
  MleAccumulator acc(params);
  const double delta = ensemble.grid.fine_step();
  for (std::size_t k = 0; k < ensemble.modes(); ++k) {
    const double lambda = eigs.lambdas[k];
    const double noise_rate = params.sigma * params.sigma * std::pow(lambda, -2.0 * params.gamma);
    const auto s = continuous_mode_sums(ensemble.row(k), delta, noise_rate);
    acc.add(lambda,
            numerator == NumeratorMode::ItoIdentity ? s.ito_numerator : s.riemann_numerator,
            denominator == DenominatorRule::Trapezoid ? s.trapezoid : s.left_point);
  }
  EstimateRecord rec;
  rec.kind = EstimatorKind::Continuous;
  rec.theta_hat = acc.estimate();
  rec.modes = ensemble.modes();
  rec.observations = ensemble.grid.observations;
  rec.horizon = ensemble.grid.horizon;
  rec.z_score = normalize_error(rec.theta_hat, params, eigs.varpi, rec.modes, rec.horizon);
  rec.theoretical_std = theoretical_std(params, eigs.varpi, rec.modes, rec.horizon);
  rec.provenance = ensemble.provenance;
  return rec;
}

DecompositionTerms decomposition_terms(const PathEnsemble& ensemble, const ModelParams& params,
                                       const EigenSequence& eigs) {
  check_modes(ensemble.modes(), eigs, "decomposition_terms");
  if (!ensemble.provenance) {
    fail(ErrorCode::MissingProvenance,
         "decomposition_terms: ensemble carries no stream provenance, so the Brownian "
         "increments cannot be reconstructed");
  }
  TermsAccumulator acc(params);
  const double delta = ensemble.grid.fine_step();
  const bool noisy = ensemble.params.sigma > 0.0;
  std::vector<double> increments(ensemble.grid.fine_steps(), 0.0);
  for (std::size_t k = 0; k < ensemble.modes(); ++k) {
    // Without noise the stochastic integrals are identically zero.
    if (noisy) {
      brownian_increments(ensemble.params, ensemble.lambdas[k], ensemble.grid,
                          RngStreamKey{ensemble.provenance->master_seed,
                                       ensemble.provenance->replication, k},
                          increments);
    }
    acc.add(eigs.lambdas[k],
            decomposition_mode_terms(ensemble.row(k), increments, ensemble.grid.oversample, delta));
  }
  return acc.terms();
}

double upsilon(const ModelParams& params, double varpi) {
  const double d = params.dimension;
  return std::sqrt(std::pow(varpi, params.beta) / ((4.0 * params.beta / d + 2.0) * params.theta0));
}

double normalization_rate(const ModelParams& params, double varpi, std::size_t n_modes,
                          double horizon) {
  const double d = params.dimension;
  return upsilon(params, varpi) * std::sqrt(horizon) *
         std::pow(static_cast<double>(n_modes), params.beta / d + 0.5);
}

double normalize_error(double theta_hat, const ModelParams& params, double varpi,
                       std::size_t n_modes, double horizon) {
  return normalization_rate(params, varpi, n_modes, horizon) * (params.theta0 - theta_hat);
}

double theoretical_std(const ModelParams& params, double varpi, std::size_t n_modes,
                       double horizon) {
  return 1.0 / normalization_rate(params, varpi, n_modes, horizon);
}

}  // namespace spdelab
