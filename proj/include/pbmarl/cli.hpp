#pragma once

// Command implementations behind the `pbmarl` executable. Each command returns a
// process exit code: 0 ok, 2 data error, 3 config error, 4 report-input error.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pbmarl/aggregation.hpp"
#include "pbmarl/csv.hpp"
#include "pbmarl/election.hpp"
#include "pbmarl/error.hpp"
#include "pbmarl/metrics.hpp"
#include "pbmarl/neural.hpp"
#include "pbmarl/pabulib.hpp"
#include "pbmarl/training.hpp"

namespace pbmarl::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kFormatVersion = 1;

enum ExitCode : int { kOk = 0, kDataError = 2, kConfigError = 3, kReportInputError = 4 };

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

using Settings = std::vector<std::pair<std::string, std::string>>;

/// Flat `key = value` lines; `#` starts a comment.
inline Settings parse_config_text(std::string_view text) {
  Settings out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trimmed = std::string(pbmarl::detail::trim(line));
    if (!trimmed.empty() && trimmed.back() == '\r') trimmed.pop_back();
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::ConfigError, "config line " + std::to_string(line_no) + " is not key = value");
    auto key = std::string(pbmarl::detail::trim(std::string_view(trimmed).substr(0, eq)));
    auto value = std::string(pbmarl::detail::trim(std::string_view(trimmed).substr(eq + 1)));
    if (key.empty()) throw Error(ErrorKind::ConfigError, "config line " + std::to_string(line_no) + " has no key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !in.eof()) throw Error(ErrorKind::ConfigError, key + ": '" + value + "' is not a valid number");
  return out;
}

inline std::vector<std::size_t> parse_widths(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  if (pbmarl::detail::trim(value).empty()) return out;
  for (const auto& part : pbmarl::detail::split(value, ','))
    out.push_back(parse_number<std::size_t>(key, std::string(pbmarl::detail::trim(part))));
  return out;
}

inline std::string join_widths(const std::vector<std::size_t>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? "," : "") + std::to_string(w[i]);
  return out;
}

}  // namespace detail

/// Options of `simulate` beyond the experiment itself.
struct SimulateOptions {
  ExperimentConfig config;
  int repetitions = 1;
  bool checkpoints = true;
};

inline void apply_setting(SimulateOptions& opts, const std::string& key, const std::string& value) {
  using detail::parse_number;
  auto& c = opts.config;
  if (key == "election") c.election_path = value;
  else if (key == "rule") c.rule = parse_rule(value);
  else if (key == "episodes" || key == "training_episodes") c.training_episodes = parse_number<int>(key, value);
  else if (key == "validation_interval") c.validation_interval = parse_number<int>(key, value);
  else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
  else if (key == "epsilon_start") c.epsilon_start = parse_number<double>(key, value);
  else if (key == "epsilon_end") c.epsilon_end = parse_number<double>(key, value);
  else if (key == "epsilon_decay_fraction") c.epsilon_decay_fraction = parse_number<double>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "voters") {
    if (value == "all" || value.empty()) c.voter_subsample.reset();
    else c.voter_subsample = parse_number<std::size_t>(key, value);
  } else if (key == "out" || key == "output_dir") c.output_dir = value;
  else if (key == "optimizer") c.optimizer = nn::parse_optimizer(value);
  else if (key == "replay_capacity") c.replay_capacity = parse_number<std::size_t>(key, value);
  else if (key == "recent_window") c.recent_window = parse_number<std::size_t>(key, value);
  else if (key == "target_update") c.target_update = parse_number<int>(key, value);
  else if (key == "discount" || key == "gamma") c.discount = parse_number<double>(key, value);
  else if (key == "trunk_hidden") c.trunk_hidden = detail::parse_widths(key, value);
  else if (key == "head_hidden") c.head_hidden = detail::parse_widths(key, value);
  else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
  else if (key == "repetitions") opts.repetitions = parse_number<int>(key, value);
  else if (key == "checkpoints") {
    if (value != "true" && value != "false") throw Error(ErrorKind::ConfigError, "checkpoints must be true or false");
    opts.checkpoints = value == "true";
  } else {
    throw Error(ErrorKind::ConfigError, "unknown config key '" + key + "'");
  }
}

/// Config-file settings first, then flag settings (flags win).
inline SimulateOptions resolve_options(const Settings& file, const Settings& flags) {
  SimulateOptions opts;
  for (const auto& [k, v] : file) apply_setting(opts, k, v);
  for (const auto& [k, v] : flags) apply_setting(opts, k, v);
  if (opts.repetitions < 1) throw Error(ErrorKind::ConfigError, "repetitions must be >= 1");
  if (opts.config.election_path.empty()) throw Error(ErrorKind::ConfigError, "no election file given");
  if (opts.config.output_dir.empty()) throw Error(ErrorKind::ConfigError, "no output directory given (--out)");
  opts.config.validate();
  return opts;
}

// ---------------------------------------------------------------------------
// Shared file helpers

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

inline std::string winners_csv(const WinningSet& winners, const VoteProfile& profile, const ElectionInstance& e) {
  const auto scores = project_scores(profile, e.projects.size());
  std::string out = "project_id,cost,score,phase\n";
  for (std::size_t k = 0; k < winners.projects.size(); ++k) {
    const std::size_t p = winners.projects[k];
    out += csv::join({e.projects[p].id, csv::format_money(e.projects[p].cost, e.cost_scale), std::to_string(scores[p]),
                      to_string(winners.phases[k])}) +
           "\n";
  }
  return out;
}

inline std::string ballots_csv(const VoteProfile& profile, const ElectionInstance& e) {
  std::string out = "voter_id,project_id,tokens\n";
  for (std::size_t v = 0; v < profile.size(); ++v) {
    if (profile.ballots[v].empty()) out += profile.voter_ids[v] + ",,0\n";
    for (const auto& [p, t] : profile.ballots[v].entries())
      out += csv::join({profile.voter_ids[v], e.projects[p].id, std::to_string(t)}) + "\n";
  }
  return out;
}

/// Inverse of ballots_csv; voters keep their first-appearance order.
inline VoteProfile read_ballots_csv(const fs::path& path, const ElectionInstance& e) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "voter_id,project_id,tokens")
    throw Error(ErrorKind::ReportInput, path.string() + ": unexpected header");
  VoteProfile profile;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = csv::split(line);
    if (f.size() != 3) throw Error(ErrorKind::ReportInput, path.string() + ": malformed row", line_no);
    auto [it, inserted] = index.emplace(f[0], profile.size());
    if (inserted) {
      profile.voter_ids.push_back(f[0]);
      profile.ballots.emplace_back();
    }
    if (f[1].empty()) continue;
    std::size_t p = 0;
    int tokens = 0;
    try {
      p = project_index(e, f[1]);
      tokens = std::stoi(f[2]);
    } catch (const std::exception& ex) {
      throw Error(ErrorKind::ReportInput, path.string() + ": " + ex.what(), line_no);
    }
    profile.ballots[it->second].add(p, tokens);
  }
  return profile;
}

inline std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : parse_config_text(read_text_file(path))) out[k] = v;
  return out;
}

// ---------------------------------------------------------------------------
// validate-data

inline int cmd_validate_data(const fs::path& pb_path, std::ostream& out, std::ostream& err) {
  try {
    auto resolved = resolve_data_path(pb_path);
    const std::string text = read_text_file(resolved);
    const ElectionInstance e = build_election(parse_pb(text));
    std::size_t zero_token = 0;
    for (const auto& v : e.voters) zero_token += v.historical_ballot.empty();
    out << "file: " << resolved.string() << "\n"
        << "checksum: fnv1a64:" << fnv1a_hex(text) << "\n"
        << "projects: " << e.projects.size() << "\n"
        << "voters: " << e.voters.size() << "\n"
        << "voters_without_tokens: " << zero_token << "\n"
        << "impact_areas: " << e.impact_areas.size() << "\n"
        << "budget: " << csv::format_money(e.budget, e.cost_scale) << (e.currency.empty() ? "" : " " + e.currency)
        << "\n"
        << "tokens_per_voter: " << e.tokens_per_voter << "\n";
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

// ---------------------------------------------------------------------------
// aggregate

inline std::string fairness_csv(Rule rule, const WelfareReport& report) {
  std::string out = "rule,measure,unit,gini,egalitarian,utilitarian\n";
  for (auto m : kWelfareMeasures) {
    const auto& s = report[m];
    out += csv::join({std::string(to_string(rule)), std::string(to_string(m)), std::string(unit_of(m)),
                      csv::format_number(s.gini), csv::format_number(s.egalitarian),
                      csv::format_number(s.utilitarian)}) +
           "\n";
  }
  return out;
}

inline int cmd_aggregate(const fs::path& pb_path, Rule rule, const fs::path& out_dir, std::ostream& err) {
  ElectionInstance e;
  try {
    e = load_election(pb_path);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kDataError;
  }
  try {
    const VoteProfile profile = historical_profile(e);
    const WinningSet winners = aggregate(rule, profile, e);
    const WelfareReport report = welfare_report(profile, winners, e);
    fs::create_directories(out_dir);
    write_file(out_dir / "winners.csv", winners_csv(winners, profile, e));
    write_file(out_dir / "fairness.csv", fairness_csv(rule, report));
    return kOk;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return ex.is_data_error() ? kDataError : kConfigError;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kConfigError;
  }
}

// ---------------------------------------------------------------------------
// simulate

inline std::string manifest_text(const ExperimentConfig& c, const SimulateOptions& opts, int repetition,
                                  const std::string& checksum, const ElectionInstance& population, std::size_t agents) {
  std::ostringstream m;
  m << "format_version = " << kFormatVersion << "\n"
    << "tool_version = " << kToolVersion << "\n"
    << "command = simulate\n"
    << "election = " << c.election_path << "\n"
    << "dataset_checksum = fnv1a64:" << checksum << "\n"
    << "rule = " << to_string(c.rule) << "\n"
    << "seed = " << c.seed << "\n"
    << "repetition = " << repetition << "\n"
    << "repetitions = " << opts.repetitions << "\n"
    << "voters = " << agents << "\n"
    << "population = " << population.voters.size() << "\n"
    << "scale = " << (agents < population.voters.size() ? "reduced-scale" : "full") << "\n"
    << "training_episodes = " << c.training_episodes << "\n"
    << "validation_interval = " << c.validation_interval << "\n"
    << "batch_size = " << c.batch_size << "\n"
    << "learning_rate = " << csv::format_number(c.learning_rate) << "\n"
    << "optimizer = " << (c.optimizer == nn::OptimizerKind::Adam ? "adam" : "sgd") << "\n"
    << "epsilon_start = " << csv::format_number(c.epsilon_start) << "\n"
    << "epsilon_end = " << csv::format_number(c.epsilon_end) << "\n"
    << "epsilon_decay_fraction = " << csv::format_number(c.epsilon_decay_fraction) << "\n"
    << "discount = " << csv::format_number(c.discount) << "\n"
    << "replay_capacity = " << c.replay_capacity << "\n"
    << "recent_window = " << c.recent_window << "\n"
    << "target_update = " << c.target_update << "\n"
    << "trunk_hidden = " << detail::join_widths(c.trunk_hidden) << "\n"
    << "head_hidden = " << detail::join_widths(c.head_hidden) << "\n"
    << "checkpoints = " << (opts.checkpoints ? "true" : "false") << "\n";
  return m.str();
}

inline std::string training_log_csv(const std::vector<EpisodeRecord>& records) {
  std::string out = "episode,kind,mean_reward,reward_q1,reward_q3,mean_loss,loss_q1,loss_q3\n";
  for (const auto& r : training_log(records))
    out += csv::join({std::to_string(r.episode), to_string(r.kind), csv::format_number(r.mean_reward),
                      csv::format_number(r.reward_q1), csv::format_number(r.reward_q3), csv::format_number(r.mean_loss),
                      csv::format_number(r.loss_q1), csv::format_number(r.loss_q3)}) +
           "\n";
  return out;
}

inline std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

inline fs::path repetition_dir(const fs::path& out, int repetition, int repetitions) {
  if (repetitions == 1) return out;
  std::ostringstream name;
  name << "rep_" << std::setw(2) << std::setfill('0') << repetition;
  return out / name.str();
}

/// Runs every repetition (seed + r - 1) into its own run directory.
inline int cmd_simulate(const SimulateOptions& opts, std::ostream& err) {
  std::string text;
  ElectionInstance population;
  try {
    text = read_text_file(resolve_data_path(opts.config.election_path));
    population = build_election(parse_pb(text));
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kDataError;
  }
  const std::string checksum = fnv1a_hex(text);

  for (int r = 1; r <= opts.repetitions; ++r) {
    ExperimentConfig config = opts.config;
    config.seed = opts.config.seed + static_cast<std::uint64_t>(r - 1);
    const fs::path dir = repetition_dir(opts.config.output_dir, r, opts.repetitions);
    try {
      Experiment experiment(population, config);
      fs::create_directories(dir);
      write_file(dir / "INCOMPLETE", "run in progress or aborted\n");
      const std::string manifest =
          manifest_text(config, opts, r, checksum, population, experiment.agent_count());
      const std::string started = utc_now();
      write_file(dir / "manifest.txt", manifest + "started_utc = " + started + "\n");
      const auto clock_start = std::chrono::steady_clock::now();

      const EpisodeRecord untrained = experiment.evaluate();
      const auto records = experiment.run();
      const EpisodeRecord trained = experiment.evaluate();
      const ElectionInstance& played = experiment.election();

      write_file(dir / "training_log.csv", training_log_csv(records));
      const VoteProfile untrained_profile = experiment.profile_of(untrained);
      const VoteProfile trained_profile = experiment.profile_of(trained);
      write_file(dir / "ballots_untrained.csv", ballots_csv(untrained_profile, played));
      write_file(dir / "ballots_trained.csv", ballots_csv(trained_profile, played));
      write_file(dir / "winners_trained.csv", winners_csv(trained.winners, trained_profile, played));

      std::string agents = "agent,voter_id\n";
      for (std::size_t i = 0; i < played.voters.size(); ++i) agents += std::to_string(i) + "," + played.voters[i].id + "\n";
      write_file(dir / "agents.csv", agents);
      if (opts.checkpoints) {
        fs::create_directories(dir / "checkpoints");
        for (std::size_t i = 0; i < experiment.agent_count(); ++i) {
          std::ostringstream name;
          name << "agent_" << std::setw(5) << std::setfill('0') << i << ".qnet";
          std::ofstream out(dir / "checkpoints" / name.str(), std::ios::binary | std::ios::trunc);
          nn::save_policy(out, experiment.agent(i).policy);
        }
      }

      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
      write_file(dir / "manifest.txt", manifest + "started_utc = " + started +
                                           "\nelapsed_seconds = " + csv::format_number(elapsed) + "\n");
      fs::remove(dir / "INCOMPLETE");
    } catch (const Error& ex) {
      err << "error (repetition " << r << "): " << ex.what() << "\n";
      if (ex.kind() == ErrorKind::ConfigError) return kConfigError;
      return ex.is_data_error() ? kDataError : kConfigError;
    } catch (const fs::filesystem_error& ex) {
      err << "error: " << ex.what() << "\n";
      return kConfigError;
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// report

struct RunData {
  fs::path dir;
  std::map<std::string, std::string> manifest;
  Rule rule = Rule::EqualShares;
  VoteProfile trained, untrained;
};

namespace detail {

struct Stat {
  double mean = 0.0, sd = 0.0;
};

/// Mean and sample standard deviation (0 for a single value).
inline Stat stat(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return s;
}

inline VoteProfile actual_ballots_of(const VoteProfile& run_profile, const ElectionInstance& e) {
  std::map<std::string, const VoterProfile*> by_id;
  for (const auto& v : e.voters) by_id[v.id] = &v;
  VoteProfile out;
  for (const auto& id : run_profile.voter_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::ReportInput, "run voter " + id + " is not in the actual dataset");
    out.voter_ids.push_back(id);
    out.ballots.push_back(it->second->historical_ballot);
  }
  return out;
}

}  // namespace detail

inline int cmd_report(const std::vector<fs::path>& run_dirs, const std::optional<fs::path>& actual_path,
                      const fs::path& out_dir, std::ostream& err) {
  if (run_dirs.empty()) {
    err << "error: no run directories given\n";
    return kReportInputError;
  }
  std::vector<std::map<std::string, std::string>> manifests;
  for (const auto& dir : run_dirs) {
    if (!fs::is_directory(dir)) {
      err << "error: run directory " << dir.string() << " does not exist\n";
      return kReportInputError;
    }
    if (fs::exists(dir / "INCOMPLETE")) {
      err << "error: run directory " << dir.string() << " is incomplete\n";
      return kReportInputError;
    }
    for (const char* f : {"manifest.txt", "ballots_trained.csv", "ballots_untrained.csv"})
      if (!fs::exists(dir / f)) {
        err << "error: " << (dir / f).string() << " is missing\n";
        return kReportInputError;
      }
    try {
      manifests.push_back(read_manifest(dir / "manifest.txt"));
    } catch (const Error& ex) {
      err << "error: " << dir.string() << ": " << ex.what() << "\n";
      return kReportInputError;
    }
  }

  ElectionInstance e;
  try {
    fs::path path = actual_path ? *actual_path : fs::path(manifests.front()["election"]);
    e = load_election(path);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kDataError;
  }

  std::map<std::string, std::vector<RunData>> by_rule;
  try {
    for (std::size_t i = 0; i < run_dirs.size(); ++i) {
      RunData run;
      run.dir = run_dirs[i];
      run.manifest = manifests[i];
      run.rule = parse_rule(run.manifest["rule"]);
      run.trained = read_ballots_csv(run.dir / "ballots_trained.csv", e);
      run.untrained = read_ballots_csv(run.dir / "ballots_untrained.csv", e);
      by_rule[std::string(to_string(run.rule))].push_back(std::move(run));
    }
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kReportInputError;
  }

  std::string table = "rule,measure,unit,scale,runs";
  for (const char* stat_name : {"gini", "egalitarian", "utilitarian"})
    for (const char* who : {"actual", "marl"})
      table += std::string(",") + who + "_" + stat_name + "," + who + "_" + stat_name + "_sd";
  table += "\n";
  std::string fig5 = "rule,profile,bucket,share,share_sd,runs\n";
  std::string fig6 = "rule,profile,measure,threshold,proportion,proportion_sd,runs\n";

  try {
    for (const auto& [rule_name, runs] : by_rule) {
      const Rule rule = runs.front().rule;
      const std::string n_runs = std::to_string(runs.size());
      bool reduced = false;
      // [measure][actual|marl][gini|egal|util] -> per-run values
      std::vector<double> table_values[3][2][3];
      std::vector<double> bucket_values[3][4];           // [profile][bucket]
      std::vector<double> cdf_values[3][2][11];          // [profile][measure][threshold]
      for (const auto& run : runs) {
        reduced = reduced || run.trained.size() < e.voters.size();
        const VoteProfile actual = detail::actual_ballots_of(run.trained, e);
        const VoteProfile* profiles[3] = {&actual, &run.untrained, &run.trained};
        WinningSet winners[3];
        for (int k = 0; k < 3; ++k) winners[k] = aggregate(rule, *profiles[k], e);
        for (int who = 0; who < 2; ++who) {
          const int k = who == 0 ? 0 : 2;
          const auto report = welfare_report(*profiles[k], winners[k], e);
          for (std::size_t m = 0; m < 3; ++m) {
            table_values[m][who][0].push_back(report.measures[m].gini);
            table_values[m][who][1].push_back(report.measures[m].egalitarian);
            table_values[m][who][2].push_back(report.measures[m].utilitarian);
          }
        }
        for (int k = 0; k < 3; ++k) {
          const auto buckets = cost_quartile_distribution(*profiles[k], e);
          for (std::size_t b = 0; b < 4; ++b) bucket_values[k][b].push_back(buckets[b]);
          for (std::size_t m = 0; m < 2; ++m) {
            const auto values = welfare_vector(kWelfareMeasures[m], *profiles[k], winners[k], e).values;
            const auto cdf = satisfaction_cdf(values);
            for (std::size_t t = 0; t < cdf.size(); ++t) cdf_values[k][m][t].push_back(cdf[t]);
          }
        }
      }
      const char* profile_names[3] = {"actual", "untrained", "trained"};
      for (std::size_t m = 0; m < 3; ++m) {
        std::vector<std::string> row = {rule_name, std::string(to_string(kWelfareMeasures[m])),
                                        std::string(unit_of(kWelfareMeasures[m])),
                                        reduced ? "reduced-scale" : "full", n_runs};
        for (int s = 0; s < 3; ++s)
          for (int who = 0; who < 2; ++who) {
            const auto st = detail::stat(table_values[m][who][s]);
            row.push_back(csv::format_number(st.mean));
            row.push_back(csv::format_number(st.sd));
          }
        table += csv::join(row) + "\n";
      }
      for (int k = 0; k < 3; ++k)
        for (std::size_t b = 0; b < 4; ++b) {
          const auto st = detail::stat(bucket_values[k][b]);
          fig5 += csv::join({rule_name, profile_names[k], std::string(kCostBuckets[b]), csv::format_number(st.mean),
                             csv::format_number(st.sd), n_runs}) +
                  "\n";
        }
      const auto thresholds = satisfaction_thresholds();
      for (int k = 0; k < 3; ++k)
        for (std::size_t m = 0; m < 2; ++m)
          for (std::size_t t = 0; t < thresholds.size(); ++t) {
            const auto st = detail::stat(cdf_values[k][m][t]);
            fig6 += csv::join({rule_name, profile_names[k], std::string(to_string(kWelfareMeasures[m])),
                               csv::format_number(thresholds[t]), csv::format_number(st.mean),
                               csv::format_number(st.sd), n_runs}) +
                    "\n";
          }
    }
    fs::create_directories(out_dir);
    write_file(out_dir / "table4.csv", table);
    write_file(out_dir / "fig5_cost_distribution.csv", fig5);
    write_file(out_dir / "fig6_satisfaction_cdf.csv", fig6);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return ex.kind() == ErrorKind::ReportInput ? kReportInputError : kDataError;
  }
  return kOk;
}

}  // namespace pbmarl::cli
