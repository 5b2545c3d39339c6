// Acceptance suite: one pass/fail line per criterion.
// Usage: spdelab_acceptance <A1..A8|all>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spdelab/estimators.hpp"
#include "spdelab/experiments.hpp"
#include "spdelab/simulator.hpp"
#include "spdelab/spectral_model.hpp"

using namespace spdelab;

namespace {

constexpr std::uint64_t kSeed = 2026;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

ModelParams base_model() {
  ModelParams p;
  p.theta0 = 1.0;
  p.beta = 0.6;
  p.gamma = 0.6;
  p.sigma = 1.0;
  p.dimension = 1;
  return p;
}

ExperimentConfig base_config(const char* id, ExperimentKind kind) {
  ExperimentConfig c;
  c.id = id;
  c.kind = kind;
  c.model = base_model();
  c.master_seed = kSeed;
  return c;
}

const PointSummary& only_point(const SummaryTable& table, EstimatorKind kind) {
  for (const auto& p : table.points) {
    if (p.estimator == kind) return p;
  }
  throw std::runtime_error("summary has no point for the requested estimator");
}

std::vector<double> rmse_series(const SummaryTable& table) {
  std::vector<double> out;
  for (const auto& p : table.points) out.push_back(p.rmse);
  return out;
}

std::string join(const std::vector<double>& v, const char* format = "%.5f") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(format, v[i]);
  return s;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

Verdict a1_normality() {
  auto c = base_config("A1", ExperimentKind::Normality);
  c.sweep = {{20, 10000, 5.0}};
  c.oversample = 4;
  c.replications = 1000;
  c.estimator = EstimatorSelection::Both;
  const auto res = run_normality(c);
  const auto& p = only_point(res.summary, EstimatorKind::Discrete);
  const auto& q = only_point(res.summary, EstimatorKind::Continuous);
  const double ks_p = p.ks ? p.ks->p_value : 0.0;
  const bool pass = ks_p > 0.01 && std::abs(p.z_mean) < 0.1 && std::abs(p.z_std - 1.0) < 0.1;
  return {pass, fmt("z mean=%+.4f (|.|<0.1) std=%.4f (|.-1|<0.1) KS p=%.3g (>0.01); "
                    "theta bias=%+.5f, T N^(2b/d)/M=%.4f, T^3 N^(6b/d)/M^2=%.3f; "
                    "continuous estimator on the same paths: z mean=%+.4f std=%.4f KS p=%.3g",
                    p.z_mean, p.z_std, ks_p, p.bias, p.conditions.normality_linear,
                    p.conditions.normality_cubic, q.z_mean, q.z_std, q.ks ? q.ks->p_value : 0.0)};
}

Verdict a2_consistency() {
  auto c = base_config("A2", ExperimentKind::Consistency);
  c.sweep = {{10, 1000, 2.5}, {20, 4000, 5.0}, {40, 16000, 10.0}};
  c.oversample = 1;
  c.replications = 200;
  const auto res = run_consistency(c);
  const auto rmse = rmse_series(res.summary);
  const bool pass = strictly_decreasing(rmse) && rmse.back() < 0.023;
  return {pass, fmt("RMSE = [%s] strictly decreasing=%s, final < 0.023; final theoretical std=%.5f",
                    join(rmse).c_str(), strictly_decreasing(rmse) ? "yes" : "no",
                    res.summary.points.back().theoretical_std)};
}

Verdict a3_fixed_mt() {
  auto c = base_config("A3", ExperimentKind::ConsistencyFixedMT);
  c.model.dimension = 3;
  c.model.beta = 0.7;
  c.model.gamma = 2.0;
  c.sweep = {{100, 50, 1.0}, {400, 50, 1.0}, {1600, 50, 1.0}};
  c.oversample = 2;
  c.replications = 200;
  const auto res = run_consistency(c);
  const auto rmse = rmse_series(res.summary);
  std::vector<double> bias;
  for (const auto& p : res.summary.points) bias.push_back(p.bias);
  return {strictly_decreasing(rmse),
          fmt("RMSE = [%s] must strictly decrease in N; bias = [%s]", join(rmse).c_str(),
              join(bias, "%+.5f").c_str())};
}

Verdict a4_rates() {
  auto c = base_config("A4", ExperimentKind::Rates);
  for (std::size_t m = 16; m <= 512; m *= 2) c.sweep.push_back({10, m, 2.0});
  c.fine_steps = std::size_t{1} << 14;
  c.replications = 2000;
  const auto res = run_rate_verification(c);
  bool pass = true;
  std::string detail;
  for (const auto& f : res.summary.rate_fits) {
    if (!f.fit) {
      pass = false;
      detail += f.quantity + ": skipped (" + f.skipped_reason + "); ";
      continue;
    }
    const double s = f.fit->slope;
    const double r2 = f.fit->r_squared;
    const bool slope_ok = f.quantity == "Y" ? (s >= -1.25 && s <= -0.75) : s <= -1.6;
    pass = pass && slope_ok && r2 > 0.95;
    detail += fmt("%s slope=%.3f r2=%.4f (%s); ", f.quantity.c_str(), s, r2,
                  f.quantity == "Y" ? "in [-1.25,-0.75]" : "<= -1.6");
  }
  return {pass, detail};
}

Verdict a5_fisher() {
  auto c = base_config("A5", ExperimentKind::Fisher);
  c.sweep = {{20, 10000, 5.0}};
  c.oversample = 4;
  c.replications = 1000;
  const auto res = run_fisher_efficiency(c);
  const auto& p = only_point(res.summary, EstimatorKind::Continuous);
  const double prod = p.variance_fisher_product;
  return {prod >= 0.8 && prod <= 1.2,
          fmt("Var(theta_hat) * I_NT = %.4f (in [0.8, 1.2]); I_NT=%.2f, mean theta_hat=%.5f",
              prod, p.fisher_information, p.mean)};
}

Verdict a6_moments() {
  const auto p = base_model();
  const double lambda = 1.0;
  const SimGrid grid{2.0, 2, 1};
  const std::size_t reps = 100000;
  std::vector<double> path(grid.fine_steps() + 1);
  double m2 = 0.0, m4 = 0.0, lag = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    simulate_mode(p, lambda, grid, 0.0, {kSeed, r, 0}, path);
    const double u = path[2];
    m2 += u * u;
    m4 += u * u * u * u;
    lag += path[1] * path[2];
  }
  m2 /= reps;
  m4 /= reps;
  lag /= reps;
  const double e2 = second_moment(p, lambda, 2.0);
  const double e4 = fourth_moment(p, lambda, 2.0);
  const double ec = covariance(p, lambda, 1.0, 2.0);
  const double r2 = std::abs(m2 / e2 - 1.0);
  const double r4 = std::abs(m4 / e4 - 1.0);
  const double rc = std::abs(lag / ec - 1.0);
  return {r2 < 0.02 && r4 < 0.06 && rc < 0.03,
          fmt("E[u^2]=%.5f vs %.5f (rel %.4f < 0.02), E[u^4]=%.5f vs %.5f (rel %.4f < 0.06), "
              "E[u(1)u(2)]=%.5f vs %.5f (rel %.4f < 0.03)",
              m2, e2, r2, m4, e4, r4, lag, ec, rc)};
}

Verdict a7_exactness() {
  // Closed-form decay.
  auto det = base_model();
  det.sigma = 0.0;
  det.initial_modes = {1.0, -0.7, 0.3, 2.0, 1.5};
  const auto eigs = build_eigensequence(1, 5);
  const SimGrid grid{1.0, 100, 100};
  const auto ens = simulate_ensemble(det, eigs, grid, 5, kSeed, 0);
  double worst = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const double rate = decay_rate(det, eigs.lambdas[k]);
    for (std::size_t i = 0; i < ens.row_length(); ++i) {
      const double expected = det.initial_value(k) * std::exp(-rate * static_cast<double>(i) * grid.fine_step());
      if (expected != 0.0) worst = std::max(worst, std::abs(ens.row(k)[i] / expected - 1.0));
    }
  }
  const bool decay_ok = worst <= 1e-12;

  // Continuous estimator on a noise-free path, 1e4 fine steps.
  const double theta_err = std::abs(mle_continuous(ens, det, eigs).theta_hat - det.theta0);
  const bool theta_ok = theta_err < 1e-4;

  // Decomposition identity residual as the fine grid is refined.
  const auto noisy = base_model();
  const auto eigs10 = build_eigensequence(1, 10);
  std::vector<double> medians;
  for (std::size_t f : {8, 16, 32, 64}) {
    std::vector<double> residuals;
    for (std::uint64_t r = 0; r < 50; ++r) {
      const auto e = simulate_ensemble(noisy, eigs10, SimGrid{2.0, 100, f}, 10, kSeed, r);
      const auto t = decomposition_terms(e, noisy, eigs10);
      const double err = mle_discrete(subsample(e), noisy, eigs10).theta_hat - noisy.theta0;
      const double identity = (noisy.theta0 * t.v - noisy.sigma * t.y_coarse) / t.i_coarse;
      residuals.push_back(std::abs(err - identity));
    }
    std::nth_element(residuals.begin(), residuals.begin() + 25, residuals.end());
    const double upper = residuals[25];
    std::nth_element(residuals.begin(), residuals.begin() + 24, residuals.end());
    medians.push_back(0.5 * (upper + residuals[24]));
  }
  const bool identity_ok = strictly_decreasing(medians);
  return {decay_ok && theta_ok && identity_ok,
          fmt("decay max rel err=%.2e (<=1e-12), |theta_hat-theta0|=%.2e (<1e-4), "
              "identity residual medians F=8..64: [%s] decreasing=%s",
              worst, theta_err, join(medians, "%.3e").c_str(), identity_ok ? "yes" : "no")};
}

std::vector<std::string> sorted_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) rows.push_back(line);
  // Sort key (N, M, T, replication); the remaining columns break ties.
  auto key = [](const std::string& row) {
    std::vector<std::string> cells;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return std::make_tuple(std::stoull(cells[1]), std::stoull(cells[2]), std::stod(cells[3]),
                           std::stoull(cells[4]), row);
  };
  std::sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return rows;
}

Verdict a8_reproducibility() {
  auto pointwise = base_config("A8", ExperimentKind::Consistency);
  pointwise.sweep = {{8, 200, 1.0}, {16, 400, 2.0}};
  pointwise.oversample = 4;
  pointwise.replications = 40;
  pointwise.estimator = EstimatorSelection::Both;
  pointwise.decomposition = true;

  auto rates = base_config("A8r", ExperimentKind::Rates);
  for (std::size_t m = 16; m <= 128; m *= 2) rates.sweep.push_back({6, m, 1.0});
  rates.fine_steps = 1024;
  rates.replications = 40;

  bool same = true;
  std::size_t rows = 0;
  for (auto cfg : {pointwise, rates}) {
    cfg.threads = 1;
    const auto one = sorted_rows(records_to_csv(run_experiment(cfg).records));
    cfg.threads = 4;
    const auto four = sorted_rows(records_to_csv(run_experiment(cfg).records));
    same = same && one == four;
    rows += one.size();
  }
  return {same, fmt("sorted record files for threads=1 and threads=4 %s (%zu rows compared)",
                    same ? "are byte-identical" : "DIFFER", rows)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::pair<const char*, std::function<Verdict()>>> criteria{
      {"A1", {"asymptotic normality of discretized MLE", a1_normality}},
      {"A2", {"joint consistency", a2_consistency}},
      {"A3", {"fixed-(M,T) consistency for 4 beta < d", a3_fixed_mt}},
      {"A4", {"discretization rates", a4_rates}},
      {"A5", {"Fisher efficiency", a5_fisher}},
      {"A6", {"moment oracles", a6_moments}},
      {"A7", {"deterministic exactness and identity", a7_exactness}},
      {"A8", {"reproducibility across thread counts", a8_reproducibility}},
  };
  const std::string which = argc > 1 ? argv[1] : "all";
  if (which != "all" && !criteria.count(which)) {
    std::fprintf(stderr, "usage: %s <A1..A8|all>\n", argv[0]);
    return 2;
  }
  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (which != "all" && which != id) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = entry.second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s  %s: %s [%.1fs]\n", id.c_str(), v.pass ? "PASS" : "FAIL", entry.first,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
