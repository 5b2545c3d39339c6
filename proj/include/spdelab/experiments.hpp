#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spdelab/estimators.hpp"
#include "spdelab/spectral_model.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

enum class ExperimentKind { Normality, Consistency, ConsistencyFixedMT, Rates, Fisher };
enum class EstimatorSelection { Discrete, Continuous, Both };

const char* to_string(ExperimentKind kind) noexcept;
const char* to_string(EstimatorSelection selection) noexcept;
std::optional<ExperimentKind> parse_experiment_kind(const std::string& text);

struct SweepPoint {
  std::size_t modes = 1;
  std::size_t observations = 1;
  double horizon = 1.0;

  bool operator==(const SweepPoint&) const = default;
};

struct ExperimentConfig {
  std::string id = "experiment";
  ExperimentKind kind = ExperimentKind::Normality;
  ModelParams model;
  // (N, M, T) per point. For `rates` every point shares N and T and the
  // M values form the coarse ladder over a fixed fine grid.
  std::vector<SweepPoint> sweep;
  std::size_t replications = 100;
  std::uint64_t master_seed = 0;
  std::size_t oversample = 8;
  // Fine steps on [0, T] for `rates`; 0 means max(M) * oversample.
  std::size_t fine_steps = 0;
  EstimatorSelection estimator = EstimatorSelection::Discrete;
  NumeratorMode numerator = NumeratorMode::ItoIdentity;
  // Also evaluate Y/I/V for every replication (needs oversample >= 2 to be informative).
  bool decomposition = false;
  // 0 selects the available hardware parallelism.
  unsigned threads = 0;
  // Replications whose fine-grid ensemble exceeds this are simulated mode by mode.
  std::size_t memory_budget_bytes = std::size_t{256} << 20;
  std::filesystem::path output_dir = ".";

  std::size_t rate_fine_steps() const;
  unsigned resolved_threads() const;

  // Throws InvalidArgument naming the field; returns warnings.
  std::vector<std::string> validate() const;
};

struct ReplicationRecord {
  std::string experiment_id;
  SweepPoint point;
  std::size_t replication = 0;
  EstimatorKind estimator = EstimatorKind::Discrete;
  bool failed = false;
  double theta_hat = 0.0;
  double z_score = 0.0;
  std::optional<DecompositionTerms> terms;
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds; not serialized
};

// Hypothesis-condition values at one sweep point.
struct ConditionValues {
  double consistency = 0.0;        // T^2 N^{4 beta/d - 1} / M^2
  double normality_cubic = 0.0;    // T^3 N^{6 beta/d} / M^2
  double normality_linear = 0.0;   // T N^{2 beta/d} / M
};

ConditionValues condition_values(const ModelParams& model, const SweepPoint& point);

struct PointSummary {
  SweepPoint point;
  EstimatorKind estimator = EstimatorKind::Discrete;
  std::size_t successes = 0;
  std::size_t failures = 0;
  double mean = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double empirical_std = 0.0;
  double theoretical_std = 0.0;
  double z_mean = 0.0;
  double z_std = 0.0;
  std::optional<KsResult> ks;  // empty when the sample is too small
  bool degenerate = false;     // zero spread across replications
  bool low_precision = false;
  double fisher_information = 0.0;
  double variance_fisher_product = 0.0;
  ConditionValues conditions;
};

struct RateLevel {
  std::size_t observations = 0;
  std::size_t samples = 0;
  double y_mean_square = 0.0;
  double i_mean_square = 0.0;
  double v_mean_square = 0.0;
  double y_standard_error = 0.0;
  double i_standard_error = 0.0;
  double v_standard_error = 0.0;
};

struct RateFit {
  std::string quantity;  // "Y", "I", "V"
  double bound_exponent = 0.0;
  std::optional<SlopeFit> fit;
  std::string skipped_reason;  // set when `fit` is empty
};

struct SummaryTable {
  std::string experiment_id;
  ExperimentKind kind = ExperimentKind::Normality;
  std::uint64_t master_seed = 0;
  std::size_t replications = 0;
  unsigned threads = 1;
  std::vector<PointSummary> points;
  std::vector<RateLevel> rate_levels;
  std::vector<RateFit> rate_fits;
  // Per estimator: whether RMSE strictly decreases along the sweep order.
  std::optional<bool> rmse_strictly_decreasing;
  std::vector<std::string> warnings;
};

struct ExperimentResult {
  std::vector<ReplicationRecord> records;
  SummaryTable summary;
};

inline constexpr std::size_t kMinKsSample = 8;
inline constexpr std::size_t kPrecisionSample = 100;
inline constexpr double kMaxFailureFraction = 0.01;

ExperimentResult run_normality(const ExperimentConfig& config);
ExperimentResult run_consistency(const ExperimentConfig& config);
ExperimentResult run_rate_verification(const ExperimentConfig& config);
ExperimentResult run_fisher_efficiency(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config);

// Aggregates records into a summary; depends only on the record multiset
// and the configuration.
SummaryTable summarize(const ExperimentConfig& config,
                       const std::vector<ReplicationRecord>& records);

struct OutputFiles {
  std::filesystem::path records_csv;
  std::filesystem::path summary_json;
};

std::string records_to_csv(const std::vector<ReplicationRecord>& records);
std::vector<ReplicationRecord> records_from_csv(const std::string& text);
std::string summary_to_json(const SummaryTable& summary);

// Writes {id}_records.csv and {id}_summary.json into `output_dir`, each via
// a temporary file and rename.
OutputFiles write_outputs(const std::vector<ReplicationRecord>& records,
                          const SummaryTable& summary, const std::filesystem::path& output_dir);

}  // namespace spdelab
