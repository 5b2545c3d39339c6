#include "spdelab/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spdelab/error.hpp"

namespace spdelab {
namespace {

using u64 = unsigned long long;

u64 isqrt(u64 n) {
  auto r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Number of positive integer tuples of length `dim` with squared norm <= r2.
u64 count_within(int dim, u64 r2) {
  if (r2 < static_cast<u64>(dim)) return 0;
  if (dim == 1) return isqrt(r2);
  u64 total = 0;
  const u64 top = isqrt(r2 - static_cast<u64>(dim - 1));
  for (u64 m = 1; m <= top; ++m) total += count_within(dim - 1, r2 - m * m);
  return total;
}

void collect(int dim, int level, u64 remaining, u64 norm_so_far, LatticeMode& current,
             std::vector<LatticeMode>& out) {
  const int left = dim - level - 1;
  if (remaining < static_cast<u64>(left) + 1) return;
  const u64 top = isqrt(remaining - static_cast<u64>(left));
  for (u64 m = 1; m <= top; ++m) {
    current.index[level] = static_cast<int>(m);
    if (left == 0) {
      current.norm2 = norm_so_far + m * m;
      out.push_back(current);
    } else {
      collect(dim, level + 1, remaining - m * m, norm_so_far + m * m, current, out);
    }
  }
  current.index[level] = 0;
}

void check_dimension(int dimension) {
  if (dimension < 1 || dimension > kMaxDimension) {
    std::ostringstream msg;
    msg << "unsupported dimension " << dimension << " (supported: 1.." << kMaxDimension << ")";
    fail(ErrorCode::Unsupported, msg.str());
  }
}

}  // namespace

std::vector<std::string> ModelParams::validate(const std::string& scope) const {
  auto bad = [&](const char* field, const char* rule) {
    std::ostringstream msg;
    msg << scope << "." << field << ": " << rule;
    fail(ErrorCode::InvalidArgument, msg.str());
  };
  if (!(theta0 > 0.0) || !std::isfinite(theta0)) bad("theta0", "must be a finite value > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) bad("beta", "must be a finite value > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) bad("gamma", "must be a finite value >= 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) bad("sigma", "must be a finite value >= 0");
  if (dimension < 1) bad("dimension", "must be >= 1");
  if (dimension > kMaxDimension) bad("dimension", "only boxes of dimension 1..4 are supported");
  for (double v : initial_modes) {
    if (!std::isfinite(v)) bad("initial_modes", "entries must be finite");
  }

  std::vector<std::string> warnings;
  if (beta <= 0.5) {
    warnings.push_back(scope + ".beta: hypothesis beta > 1/2 of the asymptotic theory is violated");
  }
  if (2.0 * gamma <= dimension) {
    warnings.push_back(scope +
                       ".gamma: hypothesis gamma > d/2 (also the well-posedness condition "
                       "2 gamma > d) is violated");
  }
  return warnings;
}

std::vector<LatticeMode> enumerate_lattice_modes(int dimension, std::size_t count) {
  check_dimension(dimension);
  if (count == 0) fail(ErrorCode::InvalidArgument, "eigenvalue count must be >= 1");
  if (count > kMaxEigenCount) {
    std::ostringstream msg;
    msg << "eigenvalue count " << count << " exceeds the enumeration limit " << kMaxEigenCount;
    fail(ErrorCode::Unsupported, msg.str());
  }

  // Doubling search for a squared radius whose ball holds at least `count` modes.
  u64 r2 = static_cast<u64>(dimension);
  while (count_within(dimension, r2) < count) r2 *= 2;

  std::vector<LatticeMode> modes;
  LatticeMode scratch;
  collect(dimension, 0, r2, 0, scratch, modes);

  auto order = [](const LatticeMode& a, const LatticeMode& b) {
    if (a.norm2 != b.norm2) return a.norm2 < b.norm2;
    return a.index < b.index;
  };
  std::partial_sort(modes.begin(), modes.begin() + static_cast<std::ptrdiff_t>(count), modes.end(),
                    order);
  modes.resize(count);
  return modes;
}

EigenSequence build_eigensequence(int dimension, std::size_t count) {
  const auto modes = enumerate_lattice_modes(dimension, count);
  EigenSequence eigs;
  eigs.dimension = dimension;
  eigs.varpi = weyl_constant(dimension);
  eigs.lambdas.reserve(count);
  for (const auto& m : modes) eigs.lambdas.push_back(std::sqrt(static_cast<double>(m.norm2)));
  return eigs;
}

double weyl_constant(int dimension) {
  check_dimension(dimension);
  const double d = dimension;
  const double unit_ball = std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
  return std::pow(std::pow(2.0, d) / unit_ball, 2.0 / d);
}

double spectral_sum(const EigenSequence& eigs, double power, std::size_t count) {
  if (count > eigs.size()) {
    fail(ErrorCode::InvalidArgument, "spectral_sum: count exceeds the eigensequence length");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) total += std::pow(eigs.lambdas[k], power);
  return total;
}

double decay_rate(const ModelParams& params, double lambda) {
  return params.theta0 * std::pow(lambda, 2.0 * params.beta);
}

double second_moment(const ModelParams& params, double lambda, double t) {
  const double scale = params.sigma * params.sigma *
                       std::pow(lambda, -2.0 * params.beta - 2.0 * params.gamma) /
                       (2.0 * params.theta0);
  return scale * one_minus_exp_neg(2.0 * decay_rate(params, lambda) * t);
}

double fourth_moment(const ModelParams& params, double lambda, double t) {
  const double m2 = second_moment(params, lambda, t);
  return 3.0 * m2 * m2;
}

double covariance(const ModelParams& params, double lambda, double t, double s) {
  if (t > s) std::swap(t, s);
  const double rate = decay_rate(params, lambda);
  const double scale = params.sigma * params.sigma *
                       std::pow(lambda, -2.0 * params.gamma - 2.0 * params.beta) /
                       (2.0 * params.theta0);
  // e^{-r(s-t)} - e^{-r(s+t)} = e^{-r(s-t)} (1 - e^{-2rt})
  return scale * std::exp(-rate * (s - t)) * one_minus_exp_neg(2.0 * rate * t);
}

double fisher_information(const ModelParams& params, const EigenSequence& eigs,
                          std::size_t n_modes, double horizon) {
  if (n_modes > eigs.size()) {
    fail(ErrorCode::InvalidArgument, "fisher_information: N exceeds the eigensequence length");
  }
  if (!(horizon > 0.0)) fail(ErrorCode::InvalidArgument, "fisher_information: T must be > 0");
  const double two_theta = 2.0 * params.theta0;
  double total = 0.0;
  for (std::size_t k = 0; k < n_modes; ++k) {
    const double l2b = std::pow(eigs.lambdas[k], 2.0 * params.beta);
    const double x = two_theta * l2b * horizon;
    // T - (1 - e^{-x}) / (2 theta l2b), written so small x keeps full precision.
    const double deficit = x < 1e-3 ? horizon * (x / 2.0 - x * x / 6.0 + x * x * x / 24.0)
                                    : horizon - one_minus_exp_neg(x) / (two_theta * l2b);
    total += l2b * deficit;
  }
  return total / two_theta;
}

double fisher_information_asymptotic(const ModelParams& params, std::size_t n_modes,
                                     double horizon) {
  const double d = params.dimension;
  const double varpi = weyl_constant(params.dimension);
  return std::pow(varpi, params.beta) * d * horizon *
         std::pow(static_cast<double>(n_modes), 2.0 * params.beta / d + 1.0) /
         ((4.0 * params.beta + 2.0 * d) * params.theta0);
}

}  // namespace spdelab
