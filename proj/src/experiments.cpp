#include "spdelab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "spdelab/error.hpp"
#include "spdelab/simulator.hpp"

namespace spdelab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream replication index: sweep points never share noise.
std::uint64_t stream_replication(std::size_t point_index, std::size_t replication) {
  return (static_cast<std::uint64_t>(point_index) << 32) | static_cast<std::uint64_t>(replication);
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::optional<double> try_estimate(const MleAccumulator& acc) {
  try {
    return acc.estimate();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroDenominator) throw;
    return std::nullopt;
  }
}

struct ReplicationOutcome {
  std::optional<double> discrete;
  std::optional<double> continuous;
  std::optional<DecompositionTerms> terms;
};

struct ReplicationRequest {
  bool discrete = false;
  bool continuous = false;
  bool terms = false;
};

ReplicationOutcome simulate_whole(const ExperimentConfig& config, const EigenSequence& eigs,
                                  const SimGrid& grid, std::size_t n_modes, std::uint64_t rep,
                                  const ReplicationRequest& want) {
  const auto ens = simulate_ensemble(config.model, eigs, grid, n_modes, config.master_seed, rep);
  ReplicationOutcome out;
  auto guarded = [](auto&& fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroDenominator) throw;
      return std::nullopt;
    }
  };
  if (want.discrete) {
    out.discrete = guarded([&] { return mle_discrete(subsample(ens), config.model, eigs).theta_hat; });
  }
  if (want.continuous) {
    out.continuous = guarded(
        [&] { return mle_continuous(ens, config.model, eigs, config.numerator).theta_hat; });
  }
  if (want.terms) out.terms = decomposition_terms(ens, config.model, eigs);
  return out;
}

// Mode-at-a-time variant of simulate_whole; same kernels, same summation order.
ReplicationOutcome simulate_streaming(const ExperimentConfig& config, const EigenSequence& eigs,
                                      const SimGrid& grid, std::size_t n_modes,
                                      std::uint64_t rep, const ReplicationRequest& want) {
  const auto& model = config.model;
  std::vector<double> path(grid.fine_steps() + 1);
  std::vector<double> increments(want.terms ? grid.fine_steps() : 0, 0.0);
  MleAccumulator discrete(model), continuous(model);
  TermsAccumulator terms(model);
  const double delta = grid.fine_step();
  for (std::size_t k = 0; k < n_modes; ++k) {
    const double lambda = eigs.lambdas[k];
    const RngStreamKey key{config.master_seed, rep, k};
    simulate_mode(model, lambda, grid, model.initial_value(k), key, path);
    if (want.discrete) {
      const auto s = discrete_mode_sums(path, grid.oversample, grid.observations, grid.coarse_step());
      discrete.add(lambda, s.numerator, s.denominator);
    }
    if (want.continuous) {
      const double noise_rate = model.sigma * model.sigma * std::pow(lambda, -2.0 * model.gamma);
      const auto s = continuous_mode_sums(path, delta, noise_rate);
      continuous.add(lambda,
                     config.numerator == NumeratorMode::ItoIdentity ? s.ito_numerator
                                                                    : s.riemann_numerator,
                     s.trapezoid);
    }
    if (want.terms) {
      if (model.sigma > 0.0) brownian_increments(model, lambda, grid, key, increments);
      terms.add(lambda, decomposition_mode_terms(path, increments, grid.oversample, delta));
    }
  }
  ReplicationOutcome out;
  if (want.discrete) out.discrete = try_estimate(discrete);
  if (want.continuous) out.continuous = try_estimate(continuous);
  if (want.terms) out.terms = terms.terms();
  return out;
}

ReplicationRecord make_record(const ExperimentConfig& config, const SweepPoint& point,
                              std::size_t replication, EstimatorKind kind,
                              const std::optional<double>& theta, const EigenSequence& eigs) {
  ReplicationRecord r;
  r.experiment_id = config.id;
  r.point = point;
  r.replication = replication;
  r.estimator = kind;
  r.seed = config.master_seed;
  if (theta) {
    r.theta_hat = *theta;
    r.z_score = normalize_error(*theta, config.model, eigs.varpi, point.modes, point.horizon);
  } else {
    r.failed = true;
    r.theta_hat = kNaN;
    r.z_score = kNaN;
  }
  return r;
}

std::size_t max_modes(const ExperimentConfig& config) {
  std::size_t n = 0;
  for (const auto& p : config.sweep) n = std::max(n, p.modes);
  return n;
}

void enforce_failure_budget(const ExperimentConfig& config, const SummaryTable& summary) {
  for (const auto& p : summary.points) {
    const double total = static_cast<double>(p.successes + p.failures);
    if (p.failures > 0 && static_cast<double>(p.failures) > kMaxFailureFraction * total) {
      std::ostringstream msg;
      msg << "experiment '" << config.id << "' aborted: " << p.failures << " of " << total
          << " replications at (N=" << p.point.modes << ", M=" << p.point.observations
          << ", T=" << p.point.horizon << ") hit ZeroDenominator (limit "
          << kMaxFailureFraction * 100.0 << "%)";
      fail(ErrorCode::Runtime, msg.str());
    }
  }
}

// Shared driver for normality, consistency and fisher runs.
ExperimentResult run_pointwise(const ExperimentConfig& config, ReplicationRequest want) {
  const auto eigs = build_eigensequence(config.model.dimension, max_modes(config));
  const std::size_t per_point = config.replications;
  const std::size_t tasks = config.sweep.size() * per_point;
  std::vector<EstimatorKind> kinds;
  if (want.discrete) kinds.push_back(EstimatorKind::Discrete);
  if (want.continuous) kinds.push_back(EstimatorKind::Continuous);
  std::vector<ReplicationRecord> records(tasks * kinds.size());

  parallel_for(tasks, config.resolved_threads(), [&](std::size_t task) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t point_index = task / per_point;
    const std::size_t replication = task % per_point;
    const auto& point = config.sweep[point_index];
    const SimGrid grid{point.horizon, point.observations, config.oversample};
    const auto rep = stream_replication(point_index, replication);
    const double bytes = static_cast<double>(point.modes) *
                         static_cast<double>(grid.fine_steps() + 1) * sizeof(double);
    const auto outcome = bytes <= static_cast<double>(config.memory_budget_bytes)
                             ? simulate_whole(config, eigs, grid, point.modes, rep, want)
                             : simulate_streaming(config, eigs, grid, point.modes, rep, want);
    const double wall = elapsed_since(start);
    for (std::size_t e = 0; e < kinds.size(); ++e) {
      const auto& theta =
          kinds[e] == EstimatorKind::Discrete ? outcome.discrete : outcome.continuous;
      auto rec = make_record(config, point, replication, kinds[e], theta, eigs);
      rec.terms = outcome.terms;
      rec.wall_time = wall;
      records[task * kinds.size() + e] = std::move(rec);
    }
  });

  ExperimentResult result;
  result.summary = summarize(config, records);
  result.records = std::move(records);
  enforce_failure_budget(config, result.summary);
  return result;
}

ReplicationRequest request_for(const ExperimentConfig& config) {
  ReplicationRequest want;
  want.discrete = config.estimator != EstimatorSelection::Continuous;
  want.continuous = config.estimator != EstimatorSelection::Discrete;
  want.terms = config.decomposition;
  return want;
}

void require_kind(const ExperimentConfig& config, std::initializer_list<ExperimentKind> allowed,
                  const char* who) {
  for (auto k : allowed) {
    if (config.kind == k) return;
  }
  fail(ErrorCode::InvalidArgument,
       std::string(who) + ": experiment.kind '" + to_string(config.kind) + "' does not match");
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::Normality: return "normality";
    case ExperimentKind::Consistency: return "consistency";
    case ExperimentKind::ConsistencyFixedMT: return "consistency_fixed_MT";
    case ExperimentKind::Rates: return "rates";
    case ExperimentKind::Fisher: return "fisher";
  }
  return "unknown";
}

const char* to_string(EstimatorSelection selection) noexcept {
  switch (selection) {
    case EstimatorSelection::Discrete: return "discrete";
    case EstimatorSelection::Continuous: return "continuous";
    case EstimatorSelection::Both: return "both";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& text) {
  for (auto k : {ExperimentKind::Normality, ExperimentKind::Consistency,
                 ExperimentKind::ConsistencyFixedMT, ExperimentKind::Rates,
                 ExperimentKind::Fisher}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

std::size_t ExperimentConfig::rate_fine_steps() const {
  if (fine_steps > 0) return fine_steps;
  std::size_t m = 0;
  for (const auto& p : sweep) m = std::max(m, p.observations);
  return m * oversample;
}

unsigned ExperimentConfig::resolved_threads() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> ExperimentConfig::validate() const {
  auto warnings = model.validate("model");
  auto bad = [](const std::string& field, const std::string& rule) {
    fail(ErrorCode::InvalidArgument, field + ": " + rule);
  };
  if (id.empty() || id.find("..") != std::string::npos ||
      id.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-.") !=
          std::string::npos) {
    bad("experiment.id", "must be a plain file-name stem of [A-Za-z0-9_.-]");
  }
  if (replications < 1) bad("experiment.replications", "must be >= 1");
  if (oversample < 1) bad("grid.oversample", "must be >= 1");
  if (sweep.empty()) bad("grid.sweep", "at least one (N, M, T) point is required");
  for (const auto& p : sweep) {
    if (p.modes < 1) bad("grid.N", "must be >= 1");
    if (p.modes > kMaxEigenCount) bad("grid.N", "exceeds the eigenvalue enumeration limit");
    if (p.observations < 1) bad("grid.M", "must be >= 1");
    if (!(p.horizon > 0.0) || !std::isfinite(p.horizon)) bad("grid.T", "must be a finite value > 0");
  }
  if (kind == ExperimentKind::Rates) {
    if (sweep.size() < 4) bad("grid.m_ladder", "rate verification needs at least 4 M levels");
    const std::size_t fine = rate_fine_steps();
    for (const auto& p : sweep) {
      if (p.modes != sweep.front().modes || p.horizon != sweep.front().horizon) {
        bad("grid.sweep", "rate verification points must share N and T");
      }
      if (fine % p.observations != 0) {
        std::ostringstream msg;
        msg << "M = " << p.observations << " does not divide the fine grid of " << fine << " steps";
        bad("grid.m_ladder", msg.str());
      }
      if (fine / p.observations < 2) {
        warnings.push_back("grid.m_ladder: M = " + std::to_string(p.observations) +
                           " leaves no fine sub-grid; V is identically zero there");
      }
    }
  }
  if (kind == ExperimentKind::ConsistencyFixedMT && !(4.0 * model.beta < model.dimension)) {
    warnings.push_back(
        "model: fixed-(M, T) consistency is only predicted when 4 beta < d; this run is exploratory");
  }
  if (decomposition && oversample < 2 && kind != ExperimentKind::Rates) {
    warnings.push_back("grid.oversample: decomposition terms need oversample >= 2 for a meaningful V");
  }
  return warnings;
}

ConditionValues condition_values(const ModelParams& model, const SweepPoint& point) {
  const double d = model.dimension;
  const double n = static_cast<double>(point.modes);
  const double m = static_cast<double>(point.observations);
  const double t = point.horizon;
  ConditionValues c;
  c.consistency = t * t * std::pow(n, 4.0 * model.beta / d - 1.0) / (m * m);
  c.normality_cubic = t * t * t * std::pow(n, 6.0 * model.beta / d) / (m * m);
  c.normality_linear = t * std::pow(n, 2.0 * model.beta / d) / m;
  return c;
}

ExperimentResult run_normality(const ExperimentConfig& config) {
  require_kind(config, {ExperimentKind::Normality}, "run_normality");
  config.validate();
  return run_pointwise(config, request_for(config));
}

ExperimentResult run_consistency(const ExperimentConfig& config) {
  require_kind(config, {ExperimentKind::Consistency, ExperimentKind::ConsistencyFixedMT},
               "run_consistency");
  config.validate();
  return run_pointwise(config, request_for(config));
}

ExperimentResult run_fisher_efficiency(const ExperimentConfig& config) {
  require_kind(config, {ExperimentKind::Fisher}, "run_fisher_efficiency");
  config.validate();
  auto want = request_for(config);
  want.continuous = true;
  return run_pointwise(config, want);
}

ExperimentResult run_rate_verification(const ExperimentConfig& config) {
  require_kind(config, {ExperimentKind::Rates}, "run_rate_verification");
  config.validate();
  const auto& model = config.model;
  const std::size_t n_modes = config.sweep.front().modes;
  const double horizon = config.sweep.front().horizon;
  const std::size_t fine = config.rate_fine_steps();
  const SimGrid fine_grid{horizon, fine, 1};
  const double delta = fine_grid.fine_step();
  const auto eigs = build_eigensequence(model.dimension, n_modes);
  const std::size_t levels = config.sweep.size();
  std::vector<ReplicationRecord> records(config.replications * levels);

  parallel_for(config.replications, config.resolved_threads(), [&](std::size_t replication) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> path(fine + 1);
    std::vector<double> increments(fine, 0.0);
    std::vector<MleAccumulator> estimates(levels, MleAccumulator(model));
    std::vector<TermsAccumulator> terms(levels, TermsAccumulator(model));
    for (std::size_t k = 0; k < n_modes; ++k) {
      const double lambda = eigs.lambdas[k];
      const RngStreamKey key{config.master_seed, stream_replication(0, replication), k};
      simulate_mode(model, lambda, fine_grid, model.initial_value(k), key, path);
      if (model.sigma > 0.0) brownian_increments(model, lambda, fine_grid, key, increments);
      for (std::size_t l = 0; l < levels; ++l) {
        const std::size_t m = config.sweep[l].observations;
        const std::size_t stride = fine / m;
        const auto s = discrete_mode_sums(path, stride, m, horizon / static_cast<double>(m));
        estimates[l].add(lambda, s.numerator, s.denominator);
        terms[l].add(lambda, decomposition_mode_terms(path, increments, stride, delta));
      }
    }
    const double wall = elapsed_since(start);
    for (std::size_t l = 0; l < levels; ++l) {
      auto rec = make_record(config, config.sweep[l], replication, EstimatorKind::Discrete,
                             try_estimate(estimates[l]), eigs);
      rec.terms = terms[l].terms();
      rec.wall_time = wall;
      records[l * config.replications + replication] = std::move(rec);
    }
  });

  ExperimentResult result;
  result.summary = summarize(config, records);
  result.records = std::move(records);
  enforce_failure_budget(config, result.summary);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::Normality: return run_normality(config);
    case ExperimentKind::Consistency:
    case ExperimentKind::ConsistencyFixedMT: return run_consistency(config);
    case ExperimentKind::Rates: return run_rate_verification(config);
    case ExperimentKind::Fisher: return run_fisher_efficiency(config);
  }
  fail(ErrorCode::InvalidArgument, "unknown experiment kind");
}

SummaryTable summarize(const ExperimentConfig& config,
                       const std::vector<ReplicationRecord>& records) {
  SummaryTable table;
  table.experiment_id = config.id;
  table.kind = config.kind;
  table.master_seed = config.master_seed;
  table.replications = config.replications;
  table.threads = config.resolved_threads();
  table.warnings = config.validate();

  // Group by (sweep index, estimator); order inside a group by replication.
  std::map<std::pair<std::size_t, int>, std::vector<const ReplicationRecord*>> groups;
  for (const auto& r : records) {
    const auto it = std::find(config.sweep.begin(), config.sweep.end(), r.point);
    if (it == config.sweep.end()) {
      fail(ErrorCode::InvalidArgument, "summarize: record does not belong to the configured sweep");
    }
    groups[{static_cast<std::size_t>(it - config.sweep.begin()), static_cast<int>(r.estimator)}]
        .push_back(&r);
  }
  std::size_t needed = 1;
  for (const auto& p : config.sweep) needed = std::max(needed, p.modes);
  const auto eigs = build_eigensequence(config.model.dimension, needed);
  const double theta0 = config.model.theta0;

  for (auto& [key, group] : groups) {
    std::sort(group.begin(), group.end(),
              [](const auto* a, const auto* b) { return a->replication < b->replication; });
    PointSummary s;
    s.point = config.sweep[key.first];
    s.estimator = static_cast<EstimatorKind>(key.second);
    std::vector<double> theta, z;
    for (const auto* r : group) {
      if (r->failed) {
        ++s.failures;
      } else {
        theta.push_back(r->theta_hat);
        z.push_back(r->z_score);
      }
    }
    s.successes = theta.size();
    s.theoretical_std = theoretical_std(config.model, eigs.varpi, s.point.modes, s.point.horizon);
    s.fisher_information = fisher_information(config.model, eigs, s.point.modes, s.point.horizon);
    s.conditions = condition_values(config.model, s.point);
    s.low_precision = s.successes < kPrecisionSample;
    if (!theta.empty()) {
      const double n = static_cast<double>(theta.size());
      s.mean = mean_of(theta);
      s.bias = s.mean - theta0;
      double sq = 0.0, spread = 0.0;
      for (double t : theta) {
        sq += (t - theta0) * (t - theta0);
        spread += (t - s.mean) * (t - s.mean);
      }
      s.rmse = std::sqrt(sq / n);
      const double variance = theta.size() > 1 ? spread / (n - 1.0) : 0.0;
      s.empirical_std = std::sqrt(variance);
      s.variance_fisher_product = variance * s.fisher_information;
      s.z_mean = mean_of(z);
      double zs = 0.0;
      for (double v : z) zs += (v - s.z_mean) * (v - s.z_mean);
      s.z_std = theta.size() > 1 ? std::sqrt(zs / (n - 1.0)) : 0.0;
      s.degenerate = theta.size() > 1 && std::all_of(theta.begin(), theta.end(),
                                                    [&](double t) { return t == theta.front(); });
      if (theta.size() >= kMinKsSample) s.ks = ks_test(z);
    }
    table.points.push_back(s);
  }

  if (config.kind == ExperimentKind::Consistency ||
      config.kind == ExperimentKind::ConsistencyFixedMT) {
    const auto primary = config.estimator == EstimatorSelection::Continuous
                             ? EstimatorKind::Continuous
                             : EstimatorKind::Discrete;
    std::vector<double> rmse;
    for (const auto& p : table.points) {
      if (p.estimator == primary && p.successes > 0) rmse.push_back(p.rmse);
    }
    if (rmse.size() >= 2) {
      bool decreasing = true;
      for (std::size_t i = 1; i < rmse.size(); ++i) decreasing = decreasing && rmse[i] < rmse[i - 1];
      table.rmse_strictly_decreasing = decreasing;
    }
  }

  if (config.kind == ExperimentKind::Rates) {
    std::vector<std::pair<double, double>> ys, is, vs;
    for (const auto& [key, group] : groups) {
      if (key.second != static_cast<int>(EstimatorKind::Discrete)) continue;
      std::vector<double> dy, di, dv;
      for (const auto* r : group) {
        if (!r->terms) continue;
        const auto& t = *r->terms;
        dy.push_back((t.y_coarse - t.y_fine) * (t.y_coarse - t.y_fine));
        di.push_back((t.i_coarse - t.i_fine) * (t.i_coarse - t.i_fine));
        dv.push_back(t.v * t.v);
      }
      if (dy.empty()) continue;
      RateLevel level;
      level.observations = config.sweep[key.first].observations;
      level.samples = dy.size();
      level.y_mean_square = mean_of(dy);
      level.i_mean_square = mean_of(di);
      level.v_mean_square = mean_of(dv);
      level.y_standard_error = standard_error(dy, level.y_mean_square);
      level.i_standard_error = standard_error(di, level.i_mean_square);
      level.v_standard_error = standard_error(dv, level.v_mean_square);
      table.rate_levels.push_back(level);
    }
    std::sort(table.rate_levels.begin(), table.rate_levels.end(),
              [](const auto& a, const auto& b) { return a.observations < b.observations; });
    auto fit_series = [&](const char* name, double bound, auto member) {
      RateFit fit;
      fit.quantity = name;
      fit.bound_exponent = bound;
      std::vector<std::pair<double, double>> pts;
      bool all_zero = true, positive = true;
      for (const auto& l : table.rate_levels) {
        const double y = l.*member;
        all_zero = all_zero && y == 0.0;
        positive = positive && y > 0.0 && std::isfinite(y);
        pts.emplace_back(static_cast<double>(l.observations), y);
      }
      if (pts.size() < 2) {
        fit.skipped_reason = "fewer than two M levels";
      } else if (all_zero) {
        fit.skipped_reason = "discrepancy identically zero";
      } else if (!positive) {
        fit.skipped_reason = "nonpositive discrepancy at some level";
      } else {
        fit.fit = loglog_slope(pts);
      }
      table.rate_fits.push_back(std::move(fit));
    };
    fit_series("Y", -1.0, &RateLevel::y_mean_square);
    fit_series("I", -2.0, &RateLevel::i_mean_square);
    fit_series("V", -2.0, &RateLevel::v_mean_square);
  }

  for (const auto& p : table.points) {
    if (p.failures > 0) {
      std::ostringstream msg;
      msg << p.failures << " replication(s) at (N=" << p.point.modes << ", M="
          << p.point.observations << ", T=" << p.point.horizon
          << ") failed with ZeroDenominator and were excluded";
      table.warnings.push_back(msg.str());
    }
    if (p.degenerate) {
      table.warnings.push_back("degenerate sample: all replications returned the same estimate");
    }
  }
  return table;
}

}  // namespace spdelab
