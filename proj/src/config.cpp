#include "spdelab/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "spdelab/error.hpp"

namespace spdelab {
namespace {

class LineParser {
 public:
  LineParser(const std::string& text, std::size_t line, const std::string& source)
      : text_(text), line_(line), source_(source) {}

  ConfigValue value() {
    skip_space();
    if (pos_ >= text_.size()) error("missing value");
    const char c = text_[pos_];
    ConfigValue v;
    v.line = line_;
    if (c == '[') {
      ++pos_;
      ConfigValue::Array items;
      skip_space();
      if (peek() == ']') {
        ++pos_;
      } else {
        for (;;) {
          items.push_back(value());
          skip_space();
          if (peek() == ',') {
            ++pos_;
            skip_space();
            if (peek() == ']') {  // trailing comma
              ++pos_;
              break;
            }
            continue;
          }
          if (peek() == ']') {
            ++pos_;
            break;
          }
          error("expected ',' or ']' in array");
        }
      }
      v.data = std::move(items);
    } else if (c == '"') {
      ++pos_;
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') s += text_[pos_++];
      if (pos_ >= text_.size()) error("unterminated string");
      ++pos_;
      v.data = std::move(s);
    } else if (text_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      v.data = true;
    } else if (text_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      v.data = false;
    } else {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double d = std::strtod(begin, &end);
      if (end == begin) error("unrecognized value");
      pos_ += static_cast<std::size_t>(end - begin);
      v.data = d;
    }
    return v;
  }

  void expect_end() {
    skip_space();
    if (pos_ < text_.size()) error("unexpected trailing characters");
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::Parse, source_ + ":" + std::to_string(line_) + ": " + what);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_;
  const std::string& source_;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

// Consumes keys from the document; anything left over is unknown.
class Reader {
 public:
  explicit Reader(ConfigDocument doc) : doc_(std::move(doc)) {}

  const ConfigValue* take(const std::string& section, const std::string& key) {
    auto s = doc_.sections.find(section);
    if (s == doc_.sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    taken_.insert(section + "." + key);
    return &k->second;
  }

  void reject_unknown() const {
    static const std::set<std::string> kSections = {"model", "grid", "experiment", "output"};
    for (const auto& [section, keys] : doc_.sections) {
      if (!kSections.count(section)) {
        fail(ErrorCode::InvalidArgument, "unknown section [" + section + "]");
      }
      for (const auto& [key, value] : keys) {
        if (!taken_.count(section + "." + key)) {
          fail(ErrorCode::InvalidArgument,
               "unknown key " + section + "." + key + " (line " + std::to_string(value.line) + ")");
        }
      }
    }
  }

 private:
  ConfigDocument doc_;
  std::set<std::string> taken_;
};

[[noreturn]] void type_error(const std::string& path, const char* expected) {
  fail(ErrorCode::InvalidArgument, path + ": expected " + expected);
}

double as_number(const ConfigValue& v, const std::string& path) {
  if (const auto* d = std::get_if<double>(&v.data)) return *d;
  type_error(path, "a number");
}

std::uint64_t as_count(const ConfigValue& v, const std::string& path, std::uint64_t minimum) {
  const double d = as_number(v, path);
  if (!(d >= static_cast<double>(minimum)) || d != std::floor(d) || d > 9.0e15) {
    fail(ErrorCode::InvalidArgument,
         path + ": expected an integer >= " + std::to_string(minimum));
  }
  return static_cast<std::uint64_t>(d);
}

std::string as_string(const ConfigValue& v, const std::string& path) {
  if (const auto* s = std::get_if<std::string>(&v.data)) return *s;
  type_error(path, "a quoted string");
}

bool as_bool(const ConfigValue& v, const std::string& path) {
  if (const auto* b = std::get_if<bool>(&v.data)) return *b;
  type_error(path, "true or false");
}

const ConfigValue::Array& as_array(const ConfigValue& v, const std::string& path) {
  if (const auto* a = std::get_if<ConfigValue::Array>(&v.data)) return *a;
  type_error(path, "an array");
}

CliConfig build(ConfigDocument doc, const ConfigOverrides& overrides) {
  Reader in(std::move(doc));
  CliConfig cli;
  auto& cfg = cli.experiment;

  auto required_number = [&](const char* key) {
    const auto* v = in.take("model", key);
    if (!v) fail(ErrorCode::InvalidArgument, std::string("model.") + key + ": missing");
    return as_number(*v, std::string("model.") + key);
  };
  cfg.model.theta0 = required_number("theta0");
  cfg.model.beta = required_number("beta");
  cfg.model.gamma = required_number("gamma");
  cfg.model.sigma = required_number("sigma");
  {
    const auto* v = in.take("model", "dimension");
    if (!v) fail(ErrorCode::InvalidArgument, "model.dimension: missing");
    const double d = as_number(*v, "model.dimension");
    if (d != std::floor(d) || d < -1e9 || d > 1e9) {
      fail(ErrorCode::InvalidArgument, "model.dimension: expected an integer");
    }
    cfg.model.dimension = static_cast<int>(d);
  }
  if (const auto* v = in.take("model", "initial_modes")) {
    for (const auto& item : as_array(*v, "model.initial_modes")) {
      cfg.model.initial_modes.push_back(as_number(item, "model.initial_modes"));
    }
  }

  // [grid]
  const auto* n = in.take("grid", "N");
  const auto* m = in.take("grid", "M");
  const auto* t = in.take("grid", "T");
  const auto* sweep = in.take("grid", "sweep");
  const auto* ladder = in.take("grid", "m_ladder");
  if (const auto* v = in.take("grid", "oversample")) cfg.oversample = as_count(*v, "grid.oversample", 1);
  if (const auto* v = in.take("grid", "fine_steps")) cfg.fine_steps = as_count(*v, "grid.fine_steps", 1);

  if (sweep && (n || m || t || ladder)) {
    fail(ErrorCode::InvalidArgument, "grid.sweep: cannot be combined with grid.N/M/T or grid.m_ladder");
  }
  if (sweep) {
    for (const auto& item : as_array(*sweep, "grid.sweep")) {
      const auto& triple = as_array(item, "grid.sweep[]");
      if (triple.size() != 3) type_error("grid.sweep[]", "an [N, M, T] triple");
      cfg.sweep.push_back({as_count(triple[0], "grid.sweep[].N", 1),
                           as_count(triple[1], "grid.sweep[].M", 1),
                           as_number(triple[2], "grid.sweep[].T")});
    }
  } else if (ladder) {
    if (!n || !t || m) {
      fail(ErrorCode::InvalidArgument, "grid.m_ladder: requires grid.N and grid.T and excludes grid.M");
    }
    const auto modes = as_count(*n, "grid.N", 1);
    const double horizon = as_number(*t, "grid.T");
    for (const auto& item : as_array(*ladder, "grid.m_ladder")) {
      cfg.sweep.push_back({modes, as_count(item, "grid.m_ladder[]", 1), horizon});
    }
  } else if (n || m || t) {
    if (!n || !m || !t) fail(ErrorCode::InvalidArgument, "grid: N, M and T must be given together");
    cfg.sweep.push_back({as_count(*n, "grid.N", 1), as_count(*m, "grid.M", 1), as_number(*t, "grid.T")});
  }

  // [experiment]
  if (const auto* v = in.take("experiment", "id")) cfg.id = as_string(*v, "experiment.id");
  if (const auto* v = in.take("experiment", "kind")) {
    const auto text = as_string(*v, "experiment.kind");
    const auto kind = parse_experiment_kind(text);
    if (!kind) fail(ErrorCode::InvalidArgument, "experiment.kind: unknown kind '" + text + "'");
    cfg.kind = *kind;
  }
  if (const auto* v = in.take("experiment", "replications")) {
    cfg.replications = as_count(*v, "experiment.replications", 1);
  }
  if (const auto* v = in.take("experiment", "seed")) cfg.master_seed = as_count(*v, "experiment.seed", 0);
  if (const auto* v = in.take("experiment", "replication")) {
    cli.replication = as_count(*v, "experiment.replication", 0);
  }
  if (const auto* v = in.take("experiment", "estimator")) {
    const auto text = as_string(*v, "experiment.estimator");
    if (text == "discrete") cfg.estimator = EstimatorSelection::Discrete;
    else if (text == "continuous") cfg.estimator = EstimatorSelection::Continuous;
    else if (text == "both") cfg.estimator = EstimatorSelection::Both;
    else fail(ErrorCode::InvalidArgument, "experiment.estimator: expected discrete, continuous or both");
  }
  if (const auto* v = in.take("experiment", "numerator")) {
    const auto text = as_string(*v, "experiment.numerator");
    if (text == "ito_identity") cfg.numerator = NumeratorMode::ItoIdentity;
    else if (text == "fine_riemann") cfg.numerator = NumeratorMode::FineRiemann;
    else fail(ErrorCode::InvalidArgument, "experiment.numerator: expected ito_identity or fine_riemann");
  }
  if (const auto* v = in.take("experiment", "decomposition")) {
    cfg.decomposition = as_bool(*v, "experiment.decomposition");
  }
  if (const auto* v = in.take("experiment", "threads")) {
    cfg.threads = static_cast<unsigned>(as_count(*v, "experiment.threads", 0));
  }
  if (const auto* v = in.take("experiment", "memory_budget_mb")) {
    cfg.memory_budget_bytes = as_count(*v, "experiment.memory_budget_mb", 1) << 20;
  }

  // [output]
  std::optional<std::filesystem::path> dir;
  if (const auto* v = in.take("output", "dir")) dir = as_string(*v, "output.dir");

  in.reject_unknown();

  if (overrides.seed) cfg.master_seed = *overrides.seed;
  if (overrides.threads) cfg.threads = *overrides.threads;
  if (overrides.kind) cfg.kind = *overrides.kind;
  if (overrides.output_dir) {
    cfg.output_dir = *overrides.output_dir;
  } else if (dir) {
    cfg.output_dir = *dir;
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    cfg.output_dir = env;
  } else {
    cfg.output_dir = "spdelab_out";
  }

  cli.warnings = cfg.validate();
  return cli;
}

}  // namespace

ConfigDocument parse_config_text(const std::string& text, const std::string& source) {
  ConfigDocument doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) fail(ErrorCode::Parse, where() + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Parse, where() + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(ErrorCode::Parse, where() + "empty key");
    if (section.empty()) fail(ErrorCode::Parse, where() + "key '" + key + "' outside any section");
    const std::string rest = line.substr(eq + 1);
    LineParser parser(rest, line_no, source);
    ConfigValue value = parser.value();
    parser.expect_end();
    auto& keys = doc.sections[section];
    if (keys.count(key)) fail(ErrorCode::Parse, where() + "duplicate key " + section + "." + key);
    keys.emplace(key, std::move(value));
  }
  return doc;
}

CliConfig parse_config_string(const std::string& text, const ConfigOverrides& overrides,
                              const std::string& source) {
  return build(parse_config_text(text, source), overrides);
}

CliConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "config file not found or unreadable: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_string(buffer.str(), overrides, path.string());
}

}  // namespace spdelab
