#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "heis/quadrature.hpp"

using namespace heis::cli;

int main(int argc, char** argv) {
  CLI::App app{"Vertical oscillation, beta-number and Riesz-transform experiments on the Heisenberg group"};
  app.set_version_flag("--version", kVersion);

  std::string experiment, config_path, dump_config;
  // Flag name -> config key; only flags given on the command line override the config file.
  const std::map<std::string, std::string> keys{
      {"--domain", "domain"},     {"--center", "center"},   {"--radius", "radius"},     {"--radii", "radii"},
      {"--samples", "samples"},   {"--seed", "seed"},       {"--scales", "scales"},     {"--p-exp", "p_exp"},
      {"--eps-grid", "eps_grid"}, {"--out", "out"},         {"--format", "format"},     {"--threads", "threads"},
      {"--s-nodes", "s_nodes"},   {"--points", "points"}};
  std::map<std::string, std::string> values;
  app.add_option("experiment", experiment,
                 "invariants | osc-scan | beta-scan | osc-vs-beta | dini | riesz-test | carleson | perimeter-beta");
  app.add_option("--config", config_path, "config file ([experiment] section with key = value lines)");
  app.add_option("--dump-config", dump_config, "write the effective config to this file and exit");
  const std::map<std::string, std::string> help{
      {"--domain", "domain spec, e.g. flat:theta=0, lift:phi0=abs,a=0.5, holder:H=1,tau=0.5, slab:t>0"},
      {"--center", "ball centre x,y,t (moved onto the graph for graph domains)"},
      {"--radius", "single radius"},
      {"--radii", "radii a..b in octave steps, or a comma list; 2^k notation accepted"},
      {"--samples", "Monte-Carlo samples per estimate"},
      {"--seed", "master seed"},
      {"--scales", "scale grid smin:smax:per_octave (in units of R for carleson and perimeter-beta)"},
      {"--p-exp", "exponent p >= 1 (inf accepted by beta-scan)"},
      {"--eps-grid", "truncation radii, same syntax as --radii"},
      {"--out", "output path, - for stdout"},
      {"--format", "csv or json"},
      {"--threads", "worker threads, 0 for all cores"},
      {"--s-nodes", "midpoint nodes of the s-average in osc"},
      {"--points", "evaluation points for riesz-test"}};
  for (const auto& [flag, key] : keys) app.add_option(flag, values[flag], help.at(flag));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!experiment.empty()) cfg.experiment = parse_experiment(experiment);
    else if (config_path.empty()) throw ConfigError("no experiment given");
    for (const auto& [flag, key] : keys) {
      if (app.count(flag) > 0) set_config_key(cfg, key, values[flag]);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (!dump_config.empty()) {
    std::ofstream f(dump_config);
    f << serialize_config(cfg);
    return f ? 0 : 2;
  }

  heis::set_thread_count(cfg.threads);
  RunResult result;
  try {
    result = run_experiment(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string summary = summary_json(cfg, result).dump(2);
  if (cfg.out == "-") {
    write_table(cfg, result, std::cout);
    std::cerr << summary << "\n";
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot write '" << cfg.out << "'\n";
      return 2;
    }
    write_table(cfg, result, f);
    std::ofstream s(cfg.out + ".summary.json");
    s << summary << "\n";
  }
  for (const auto& c : result.checks) {
    if (!c.passed) {
      std::cerr << "violated: " << c.name << " (observed " << format_number(c.observed) << ", limit "
                << format_number(c.limit) << ")\n";
    }
  }
  return result.passed() ? 0 : 1;
}
