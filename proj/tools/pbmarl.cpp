#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pbmarl/cli.hpp"

namespace cli = pbmarl::cli;

int main(int argc, char** argv) {
  CLI::App app{"Participatory-budgeting elections with learning voters"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kToolVersion);

  // aggregate
  auto* aggregate = app.add_subcommand("aggregate", "Aggregate the actual ballots of a .pb file");
  std::string agg_file, agg_rule = "equalshares", agg_out = ".";
  aggregate->add_option("file", agg_file, ".pb election file")->required();
  aggregate->add_option("--rule", agg_rule, "greedy|equalshares")->capture_default_str();
  aggregate->add_option("--out", agg_out, "output directory")->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Train one branching Q-learning agent per voter");
  std::string sim_config, sim_election;
  cli::Settings flags;
  simulate->add_option("election", sim_election, ".pb election file (or `election` config key)");
  simulate->add_option("--config", sim_config, "flat key = value config file");
  auto flag = [&](const char* name, const char* key, const char* help) {
    simulate->add_option_function<std::string>(
        name, [&flags, key](const std::string& v) { flags.emplace_back(key, v); }, help);
  };
  flag("--rule", "rule", "greedy|equalshares");
  flag("--seed", "seed", "base seed; repetition r uses seed + r - 1");
  flag("--episodes", "episodes", "training episodes");
  flag("--voters", "voters", "number of sampled voters (agents)");
  flag("--repetitions", "repetitions", "independent seeded runs");
  flag("--threads", "threads", "worker threads (0 = all cores)");
  flag("--out", "out", "run directory");
  flag("--validation-interval", "validation_interval", "training episodes per validation episode");
  flag("--batch-size", "batch_size", "mini-batch size");
  flag("--learning-rate", "learning_rate", "optimizer learning rate");
  flag("--optimizer", "optimizer", "adam|sgd");
  bool no_checkpoints = false;
  simulate->add_flag("--no-checkpoints", no_checkpoints, "skip writing per-agent policy checkpoints");

  // report
  auto* report = app.add_subcommand("report", "Summarise completed runs against the actual ballots");
  std::vector<std::string> report_runs;
  std::string report_actual, report_out = "report";
  report->add_option("runs", report_runs, "run directories")->required();
  report->add_option("--actual", report_actual, ".pb file holding the actual ballots");
  report->add_option("--out", report_out, "output directory")->capture_default_str();

  // validate-data
  auto* validate = app.add_subcommand("validate-data", "Parse and check a .pb file");
  std::string validate_file;
  validate->add_option("file", validate_file, ".pb election file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kConfigError;
  }

  if (*aggregate) {
    pbmarl::Rule rule;
    try {
      rule = pbmarl::parse_rule(agg_rule);
    } catch (const pbmarl::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return cli::kConfigError;
    }
    return cli::cmd_aggregate(agg_file, rule, agg_out, std::cerr);
  }

  if (*simulate) {
    cli::SimulateOptions opts;
    try {
      cli::Settings file_settings;
      if (!sim_config.empty()) file_settings = cli::parse_config_text(pbmarl::read_text_file(sim_config));
      if (!sim_election.empty()) flags.emplace_back("election", sim_election);
      if (no_checkpoints) flags.emplace_back("checkpoints", "false");
      opts = cli::resolve_options(file_settings, flags);
    } catch (const pbmarl::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return cli::kConfigError;
    }
    return cli::cmd_simulate(opts, std::cerr);
  }

  if (*report) {
    std::vector<std::filesystem::path> dirs(report_runs.begin(), report_runs.end());
    std::optional<std::filesystem::path> actual;
    if (!report_actual.empty()) actual = report_actual;
    return cli::cmd_report(dirs, actual, report_out, std::cerr);
  }

  return cli::cmd_validate_data(validate_file, std::cout, std::cerr);
}
