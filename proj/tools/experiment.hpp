#pragma once

// Experiment configuration, the config file format and the experiment runner behind the
// command-line tool.
//
// Config file: '#' comments, one [section] naming the experiment, then `key = value` lines.
//   [osc-scan]
//   domain = flat:theta=0
//   radii = 2^-4..2^4
// Unknown keys, a missing or repeated section and malformed values are rejected.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "heis/group.hpp"
#include "json.hpp"

namespace heis::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Experiment { invariants, osc_scan, beta_scan, osc_vs_beta, dini, riesz_test, carleson, perimeter_beta };
enum class Format { csv, json };

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ScaleSpec {
  double s_min = 1.0 / 64;
  double s_max = 64.0;
  int per_octave = 2;

  friend bool operator==(const ScaleSpec&, const ScaleSpec&) = default;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::osc_scan;
  std::string domain = "flat:theta=0";
  Point center;
  std::vector<double> radii;        // default 2^-4 .. 2^4
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  ScaleSpec scales;
  double p_exp = 1.0;
  std::vector<double> eps_grid;     // default 2^-1 .. 2^-6
  int s_nodes = 32;
  std::size_t points = 10;          // evaluation points for riesz-test
  Format format = Format::csv;
  std::string out = "-";
  unsigned threads = 0;

  ExperimentConfig();
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string experiment_name(Experiment e);
Experiment parse_experiment(const std::string& name);

/// "0.25", "2^-3", "inf".
double parse_number(const std::string& text);
/// "a..b" (powers-of-two steps from a up to b) or a comma list.
std::vector<double> parse_list(const std::string& text);
/// "smin:smax:per_octave".
ScaleSpec parse_scales(const std::string& text);
/// "x,y,t".
Point parse_center(const std::string& text);

/// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

/// Sets one key from its text value. Throws ConfigError for unknown keys or bad values.
void set_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);

std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a of the canonical serialization without the output path and thread count.
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct DecayFit {
  std::optional<double> slope_below;   // least-squares slope of log osc against log r, r < 1
  std::optional<double> slope_above;   // same for r > 1
  double r2_below = 0.0;
  double r2_above = 0.0;
  std::size_t n_below = 0;
  std::size_t n_above = 0;
};

/// Slopes on each side of r = 1 from (r, osc) pairs. Nonpositive values are skipped, and a
/// regime with fewer than 4 usable points has an undefined slope. With exclude_extremes the
/// first and last octave of the radius span are dropped before fitting.
DecayFit fit_decay(const std::vector<std::pair<double, double>>& profile, bool exclude_extremes = true);

using Cell = std::variant<std::string, double, std::int64_t>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Check {
  std::string name;
  bool passed = true;
  double observed = 0.0;
  double limit = 0.0;
};

struct RunResult {
  Table table;
  std::vector<Check> checks;
  nlohmann::json summary = nlohmann::json::object();

  bool passed() const;
};

/// Pure function of the configuration (the output path and thread count do not matter).
/// Throws ConfigError when the configuration does not fit the experiment.
RunResult run_experiment(const ExperimentConfig& cfg);

/// CSV with a '#' header line (version, config hash, seed), or one JSON document.
void write_table(const ExperimentConfig& cfg, const RunResult& result, std::ostream& out);
nlohmann::json summary_json(const ExperimentConfig& cfg, const RunResult& result);

}  // namespace heis::cli
