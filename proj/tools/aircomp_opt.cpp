// aircomp-opt: run or validate AirComp split-inference experiments.
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aircomp/errors.hpp"
#include "aircomp/harness.hpp"

using namespace aircomp;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

// "power" or "power:0,5,10"
void apply_sweep_flag(ExperimentConfig& c, const std::string& flag) {
  const auto colon = flag.find(':');
  c.sweep.axis = parse_sweep_axis(flag.substr(0, colon));
  if (colon != std::string::npos) {
    c.sweep.values.clear();
    for (const auto& v : split(flag.substr(colon + 1), ',')) c.sweep.values.push_back(parse_number(v));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-oriented AirComp transceiver design and inference experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the configured sweep and write CSV/JSON reports");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  std::optional<std::size_t> devices, trials, threads, blocks;
  std::optional<double> power_dbm;
  std::optional<std::uint64_t> seed;
  std::string schemes, sweep, out = "results", format = "both";
  run->add_option("--devices", devices, "Number of devices K");
  run->add_option("--power-dbm", power_dbm, "Transmit power per device (dBm)");
  run->add_option("--trials", trials, "Monte-Carlo trials per point");
  run->add_option("--seed", seed, "Scenario seed");
  run->add_option("--scheme", schemes, "Comma list: proposed,mmse_centroid,random");
  run->add_option("--sweep", sweep, "axis[:v1,v2,...] with axis in none|devices|power|pca_dims");
  run->add_option("--channel-blocks", blocks, "Channel realizations per point");
  run->add_option("--threads", threads, "Worker threads (0: all cores)");
  run->add_option("--out", out, "Output path stem");
  run->add_option("--format", format, "csv | json | both")->check(CLI::IsMember({"csv", "json", "both"}));

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config file and print the resolved config");
  validate->add_option("--config", validate_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const ExperimentConfig c = ExperimentConfig::load(validate_path);
      c.validate();
      std::cout << c.to_json().dump(2) << "\n";
      return 0;
    }

    ExperimentConfig c = ExperimentConfig::load(config_path);
    if (devices) c.scenario.devices = *devices;
    if (power_dbm) c.scenario.transmit_power_dbm = *power_dbm;
    if (trials) c.trials = *trials;
    if (seed) c.scenario.seed = *seed;
    if (blocks) c.scenario.channel_blocks = *blocks;
    if (threads) c.threads = *threads;
    if (!schemes.empty()) {
      c.schemes.clear();
      for (const auto& s : split(schemes, ',')) c.schemes.push_back(parse_scheme(s));
    }
    if (!sweep.empty()) apply_sweep_flag(c, sweep);
    c.validate();

    const ExperimentReport report = run_sweep(c);
    const ReportFormat fmt = format == "csv" ? ReportFormat::csv : format == "json" ? ReportFormat::json : ReportFormat::both;
    for (const auto& p : emit_report(report, out, fmt)) std::cerr << "wrote " << p.string() << "\n";
    std::cout << report_csv(report);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "aircomp-opt: error: " << e.what() << "\n";
    return 1;
  }
}
