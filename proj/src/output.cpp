#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "spdelab/error.hpp"
#include "spdelab/experiments.hpp"

namespace spdelab {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kCsvHeader =
    "experiment_id,N,M,T,replication,estimator,theta_hat,z_score,Y_coarse,Y_fine,I_coarse,I_fine,"
    "V,seed";

std::string number(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& cell, std::size_t line) {
  if (cell.empty()) return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size()) {
    fail(ErrorCode::Parse, "records CSV line " + std::to_string(line) + ": bad number '" + cell + "'");
  }
  return v;
}

unsigned long long parse_unsigned(const std::string& cell, std::size_t line) {
  char* end = nullptr;
  const auto v = std::strtoull(cell.c_str(), &end, 10);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    fail(ErrorCode::Parse,
         "records CSV line " + std::to_string(line) + ": bad integer '" + cell + "'");
  }
  return v;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

void write_atomically(const std::filesystem::path& target, const std::string& content) {
  auto temp = target;
  temp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open for writing: " + temp.string());
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::Io, "write failed: " + temp.string());
  }
  std::error_code ec;
  std::filesystem::rename(temp, target, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    fail(ErrorCode::Io, "cannot move into place: " + target.string());
  }
}

}  // namespace

std::string records_to_csv(const std::vector<ReplicationRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    const auto* t = r.terms ? &*r.terms : nullptr;
    const double nan = std::nan("");
    out += r.experiment_id + ',' + std::to_string(r.point.modes) + ',' +
           std::to_string(r.point.observations) + ',' + number(r.point.horizon) + ',' +
           std::to_string(r.replication) + ',' + to_string(r.estimator) + ',' +
           number(r.failed ? nan : r.theta_hat) + ',' + number(r.failed ? nan : r.z_score) + ',' +
           number(t ? t->y_coarse : nan) + ',' + number(t ? t->y_fine : nan) + ',' +
           number(t ? t->i_coarse : nan) + ',' + number(t ? t->i_fine : nan) + ',' +
           number(t ? t->v : nan) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<ReplicationRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != split_csv_line(kCsvHeader)) {
    fail(ErrorCode::Parse, "records CSV: missing or unexpected header");
  }
  std::vector<ReplicationRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 14) {
      fail(ErrorCode::Parse, "records CSV line " + std::to_string(line_no) + ": expected 14 fields");
    }
    ReplicationRecord r;
    r.experiment_id = c[0];
    r.point.modes = parse_unsigned(c[1], line_no);
    r.point.observations = parse_unsigned(c[2], line_no);
    r.point.horizon = parse_double(c[3], line_no);
    r.replication = parse_unsigned(c[4], line_no);
    if (c[5] == "discrete") {
      r.estimator = EstimatorKind::Discrete;
    } else if (c[5] == "continuous") {
      r.estimator = EstimatorKind::Continuous;
    } else {
      fail(ErrorCode::Parse, "records CSV line " + std::to_string(line_no) + ": bad estimator");
    }
    r.theta_hat = parse_double(c[6], line_no);
    r.z_score = parse_double(c[7], line_no);
    r.failed = std::isnan(r.theta_hat);
    if (!c[8].empty()) {
      r.terms = DecompositionTerms{parse_double(c[8], line_no), parse_double(c[9], line_no),
                                   parse_double(c[10], line_no), parse_double(c[11], line_no),
                                   parse_double(c[12], line_no)};
    }
    r.seed = parse_unsigned(c[13], line_no);
    records.push_back(std::move(r));
  }
  return records;
}

std::string summary_to_json(const SummaryTable& s) {
  Json doc;
  doc["experiment_id"] = s.experiment_id;
  doc["kind"] = to_string(s.kind);
  doc["master_seed"] = s.master_seed;
  doc["replications"] = s.replications;
  doc["threads"] = s.threads;
  Json points = Json::array();
  for (const auto& p : s.points) {
    Json j;
    j["N"] = p.point.modes;
    j["M"] = p.point.observations;
    j["T"] = p.point.horizon;
    j["estimator"] = to_string(p.estimator);
    j["successes"] = p.successes;
    j["failures"] = p.failures;
    j["mean"] = finite_or_null(p.mean);
    j["bias"] = finite_or_null(p.bias);
    j["rmse"] = finite_or_null(p.rmse);
    j["empirical_std"] = finite_or_null(p.empirical_std);
    j["theoretical_std"] = finite_or_null(p.theoretical_std);
    j["z_mean"] = finite_or_null(p.z_mean);
    j["z_std"] = finite_or_null(p.z_std);
    if (p.ks) {
      j["ks"] = {{"statistic", p.ks->statistic},
                 {"p_value", p.ks->p_value},
                 {"sample_size", p.ks->sample_size}};
    } else {
      j["ks"] = {{"insufficient_sample", true}};
    }
    j["degenerate"] = p.degenerate;
    j["low_precision"] = p.low_precision;
    j["fisher_information"] = finite_or_null(p.fisher_information);
    j["variance_fisher_product"] = finite_or_null(p.variance_fisher_product);
    j["conditions"] = {{"T2_N4b_d_minus_1_over_M2", p.conditions.consistency},
                       {"T3_N6b_d_over_M2", p.conditions.normality_cubic},
                       {"T_N2b_d_over_M", p.conditions.normality_linear}};
    points.push_back(std::move(j));
  }
  doc["points"] = std::move(points);
  if (s.rmse_strictly_decreasing) {
    doc["rmse_strictly_decreasing"] = *s.rmse_strictly_decreasing;
  }
  if (!s.rate_levels.empty() || !s.rate_fits.empty()) {
    Json levels = Json::array();
    for (const auto& l : s.rate_levels) {
      levels.push_back({{"M", l.observations},
                        {"samples", l.samples},
                        {"Y_mean_square", l.y_mean_square},
                        {"Y_standard_error", l.y_standard_error},
                        {"I_mean_square", l.i_mean_square},
                        {"I_standard_error", l.i_standard_error},
                        {"V_mean_square", l.v_mean_square},
                        {"V_standard_error", l.v_standard_error}});
    }
    Json fits = Json::array();
    for (const auto& f : s.rate_fits) {
      Json j{{"quantity", f.quantity}, {"bound_exponent", f.bound_exponent}};
      if (f.fit) {
        j["slope"] = f.fit->slope;
        j["intercept"] = f.fit->intercept;
        j["r_squared"] = f.fit->r_squared;
      } else {
        j["skipped"] = f.skipped_reason;
      }
      fits.push_back(std::move(j));
    }
    doc["rates"] = {{"levels", std::move(levels)}, {"fits", std::move(fits)}};
  }
  doc["warnings"] = s.warnings;
  return doc.dump(2) + "\n";
}

OutputFiles write_outputs(const std::vector<ReplicationRecord>& records,
                          const SummaryTable& summary, const std::filesystem::path& output_dir) {
  const auto& id = summary.experiment_id;
  if (id.empty() || id.find('/') != std::string::npos || id.find("..") != std::string::npos) {
    fail(ErrorCode::InvalidArgument, "experiment id '" + id + "' is not a plain file-name stem");
  }
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory: " + output_dir.string());
  OutputFiles files{output_dir / (id + "_records.csv"), output_dir / (id + "_summary.json")};
  write_atomically(files.records_csv, records_to_csv(records));
  write_atomically(files.summary_json, summary_to_json(summary));
  return files;
}

}  // namespace spdelab
