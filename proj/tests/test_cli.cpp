#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "experiment.hpp"
#include "heis/quadrature.hpp"

using namespace heis;
using namespace heis::cli;

namespace {

std::string csv_of(const ExperimentConfig& cfg) {
  std::ostringstream os;
  write_table(cfg, run_experiment(cfg), os);
  return os.str();
}

std::vector<std::pair<double, double>> profile(double (*f)(double)) {
  std::vector<std::pair<double, double>> out;
  for (int k = -24; k <= 24; ++k) {
    const double r = std::exp2(k / 4.0);
    out.emplace_back(r, f(r));
  }
  return out;
}

}  // namespace

TEST_CASE("number and list parsing") {
  CHECK(parse_number("0.25") == 0.25);
  CHECK(parse_number("2^-3") == 0.125);
  CHECK(std::isinf(parse_number("inf")));
  CHECK_THROWS_AS(parse_number("abc"), ConfigError);
  CHECK_THROWS_AS(parse_number("1.5x"), ConfigError);
  CHECK(parse_list("2^-2..2^2") == std::vector<double>{0.25, 0.5, 1, 2, 4});
  CHECK(parse_list("0.5,1,3") == std::vector<double>{0.5, 1, 3});
  CHECK_THROWS_AS(parse_list("0..2"), ConfigError);
  const ScaleSpec s = parse_scales("2^-3:8:4");
  CHECK(s.s_min == 0.125);
  CHECK(s.s_max == 8.0);
  CHECK(s.per_octave == 4);
  CHECK_THROWS_AS(parse_scales("1:0.5:2"), ConfigError);
  CHECK_THROWS_AS(parse_center("1,2"), ConfigError);
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5}) CHECK(parse_number(format_number(v)) == v);
}

TEST_CASE("config round trip") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::riesz_test;
  cfg.domain = "lift:phi0=abs,a=0.5";
  cfg.center = {0.1, 1.0 / 3.0, -0.7};
  cfg.radii = {0.5, 1.0 / 7.0, 2};
  cfg.samples = 12345;
  cfg.seed = 987654321987ULL;
  cfg.scales = {0.1, 10, 3};
  cfg.p_exp = std::numeric_limits<double>::infinity();
  cfg.eps_grid = {0.3, 0.03};
  cfg.s_nodes = 48;
  cfg.points = 7;
  cfg.format = Format::json;
  cfg.out = "out dir/table.json";
  cfg.threads = 3;
  const std::string text = serialize_config(cfg);
  const ExperimentConfig back = parse_config(text);
  CHECK(back == cfg);
  CHECK(serialize_config(back) == text);
  CHECK(parse_config(serialize_config(ExperimentConfig{})) == ExperimentConfig{});

  // The hash ignores the output path and the thread count, nothing else.
  ExperimentConfig other = cfg;
  other.out = "-";
  other.threads = 1;
  CHECK(config_hash(other) == config_hash(cfg));
  other.seed += 1;
  CHECK(config_hash(other) != config_hash(cfg));
}

TEST_CASE("config file errors") {
  CHECK_THROWS_AS(parse_config("[osc-scan]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("radii = 1\n[osc-scan]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[osc-scan]\n[dini]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[osc-scan]\nseed = 1\nseed = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[no-such-experiment]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("# only a comment\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[osc-scan]\nsamples = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[osc-scan]\nradii = 0,1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[osc-scan]\nformat = xml\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[osc-scan]\np_exp = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/heis.cfg"), ConfigError);
  const ExperimentConfig c = parse_config("# comment\n[dini]\n  seed = 5   \n\ndomain = holder:H=1,tau=0.5\n");
  CHECK(c.experiment == Experiment::dini);
  CHECK(c.seed == 5);
  CHECK(c.domain == "holder:H=1,tau=0.5");
}

TEST_CASE("decay fits on synthetic profiles") {
  const DecayFit root = fit_decay(profile([](double r) { return std::sqrt(r); }));
  REQUIRE(root.slope_below);
  REQUIRE(root.slope_above);
  CHECK(std::abs(*root.slope_below - 0.5) <= 1e-6);
  CHECK(std::abs(*root.slope_above - 0.5) <= 1e-6);
  CHECK(root.r2_below == doctest::Approx(1.0));

  const DecayFit tent = fit_decay(profile([](double r) { return std::min(r, 1.0 / r); }));
  REQUIRE(tent.slope_below);
  REQUIRE(tent.slope_above);
  CHECK(std::abs(*tent.slope_below - 1.0) <= 1e-9);
  CHECK(std::abs(*tent.slope_above + 1.0) <= 1e-9);

  const DecayFit zero = fit_decay(profile([](double) { return 0.0; }));
  CHECK(!zero.slope_below);
  CHECK(!zero.slope_above);
  CHECK(zero.n_below == 0);

  // Three points per regime are not enough.
  const DecayFit few = fit_decay({{0.25, 0.5}, {0.5, 0.7}, {0.75, 0.8}, {2, 1}, {3, 2}, {4, 3}}, false);
  CHECK(!few.slope_below);
  CHECK(!few.slope_above);

  // The extreme octaves are dropped: a corrupted first and last point do not move the slope.
  auto bent = profile([](double r) { return r * r; });
  bent.front().second = 1.0;
  bent.back().second = 1.0;
  const DecayFit trimmed = fit_decay(bent);
  CHECK(std::abs(*trimmed.slope_below - 2.0) <= 1e-9);
  CHECK(std::abs(*trimmed.slope_above - 2.0) <= 1e-9);
}

TEST_CASE("osc-scan on the vertical plane is all zero") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::osc_scan;
  cfg.samples = 2000;
  const RunResult r = run_experiment(cfg);
  CHECK(r.passed());
  REQUIRE(r.table.rows.size() == 9);
  const auto& cols = r.table.columns;
  const std::size_t est = std::find(cols.begin(), cols.end(), "estimate") - cols.begin();
  for (const auto& row : r.table.rows) CHECK(std::get<double>(row[est]) == 0.0);
}

TEST_CASE("csv header and json output") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::osc_scan;
  cfg.samples = 500;
  cfg.radii = {1.0};
  const std::string csv = csv_of(cfg);
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(cfg);
  CHECK(csv.rfind("# heis " + std::string(kVersion), 0) == 0);
  CHECK(csv.find("config_hash=" + hash.str()) != std::string::npos);
  CHECK(csv.find("seed=1") != std::string::npos);
  cfg.format = Format::json;
  std::ostringstream os;
  write_table(cfg, run_experiment(cfg), os);
  const auto j = nlohmann::json::parse(os.str());
  CHECK(j.contains("rows"));
  CHECK(summary_json(cfg, run_experiment(cfg))["passed"] == true);
}

TEST_CASE("experiments reject unsuitable configurations") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::riesz_test;
  cfg.domain = "slab:t>0";
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  cfg.domain = "nonsense";
  CHECK_THROWS(run_experiment(cfg));
}

TEST_CASE("determinism across runs and thread counts") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::osc_scan;
  cfg.domain = "holder:H=1,tau=0.5";
  cfg.radii = {0.25, 1, 4};
  cfg.samples = 4000;
  set_thread_count(1);
  const std::string one = csv_of(cfg);
  set_thread_count(8);
  const std::string many = csv_of(cfg);
  set_thread_count(0);
  CHECK(one == many);
  CHECK(one == csv_of(cfg));
  cfg.seed = 2;
  CHECK(one != csv_of(cfg));
}

TEST_CASE("measured Hoelder profile slope") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::osc_scan;
  cfg.domain = "holder:H=1,tau=1";
  cfg.radii = parse_list("2^-6..2^-1");
  cfg.samples = 20000;
  const RunResult r = run_experiment(cfg);
  const auto& cols = r.table.columns;
  const std::size_t rc = std::find(cols.begin(), cols.end(), "r") - cols.begin();
  const std::size_t ec = std::find(cols.begin(), cols.end(), "estimate") - cols.begin();
  std::vector<std::pair<double, double>> prof;
  for (const auto& row : r.table.rows) prof.emplace_back(std::get<double>(row[rc]), std::get<double>(row[ec]));
  const DecayFit fit = fit_decay(prof, false);
  REQUIRE(fit.slope_below);
  CHECK(*fit.slope_below >= 0.6);
  CHECK(*fit.slope_below <= 1.4);
}

TEST_CASE("Carleson ratio on the lifted cone is stable in R") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::carleson;
  cfg.domain = "lift:phi0=abs";
  cfg.radii = {0.5, 1, 2};
  cfg.scales = {1.0 / 16, 16, 1};
  const RunResult r = run_experiment(cfg);
  const auto& cols = r.table.columns;
  const std::size_t rc = std::find(cols.begin(), cols.end(), "ratio") - cols.begin();
  std::vector<double> ratios;
  for (const auto& row : r.table.rows) ratios.push_back(std::get<double>(row[rc]));
  REQUIRE(ratios.size() == 3);
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*lo > 0.0);
  CHECK(std::isfinite(*hi));
  CHECK(*hi <= 2.0 * *lo);
}
