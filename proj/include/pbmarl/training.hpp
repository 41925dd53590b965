#pragma once

// Independent branching-DQN voters playing repeated elections over a fixed
// project set. Each episode: every agent picks a ballot, the profile is
// aggregated, every agent is rewarded; training episodes then store one
// transition per agent and take one gradient step per agent.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "pbmarl/aggregation.hpp"
#include "pbmarl/election.hpp"
#include "pbmarl/error.hpp"
#include "pbmarl/neural.hpp"
#include "pbmarl/pabulib.hpp"
#include "pbmarl/replay.hpp"
#include "pbmarl/rewards.hpp"

namespace pbmarl {

struct ExperimentConfig {
  std::string election_path;
  Rule rule = Rule::EqualShares;
  int training_episodes = 400;
  int validation_interval = 5;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  /// Fraction of training episodes over which epsilon decays linearly.
  double epsilon_decay_fraction = 0.8;
  std::uint64_t seed = 0;
  std::optional<std::size_t> voter_subsample;
  std::string output_dir;
  nn::OptimizerKind optimizer = nn::OptimizerKind::Adam;
  std::size_t replay_capacity = 2000;
  std::size_t recent_window = 32;
  /// Gradient steps between target-network refreshes. The target copy does not enter the loss (gamma = 0).
  int target_update = 100;
  double discount = 0.0;
  std::vector<std::size_t> trunk_hidden{128, 128};
  std::vector<std::size_t> head_hidden{64};
  /// Worker threads for per-agent phases; 0 means hardware concurrency.
  unsigned threads = 0;

  void validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::ConfigError, m); };
    if (training_episodes < 1) fail("training_episodes must be >= 1");
    if (validation_interval < 1) fail("validation_interval must be >= 1");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
    if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 || epsilon_end > 1.0)
      fail("epsilon values must lie in [0, 1]");
    if (epsilon_decay_fraction < 0.0 || epsilon_decay_fraction > 1.0) fail("epsilon_decay_fraction must lie in [0, 1]");
    if (replay_capacity < 1) fail("replay_capacity must be >= 1");
    if (recent_window < 1) fail("recent_window must be >= 1");
    if (discount != 0.0) fail("only discount 0 is supported: the reward has no future component");
    if (voter_subsample && *voter_subsample == 0) fail("voters must be >= 1");
  }

  /// Linear decay from epsilon_start to epsilon_end over the first decay fraction, then constant.
  double epsilon_at(int training_episode) const {
    const double horizon = epsilon_decay_fraction * training_episodes;
    if (horizon <= 0.0) return epsilon_end;
    const double progress = static_cast<double>(training_episode - 1) / horizon;
    if (progress >= 1.0) return epsilon_end;
    return epsilon_start + (epsilon_end - epsilon_start) * progress;
  }
};

enum class EpisodeKind { Training, Validation };

constexpr const char* to_string(EpisodeKind k) { return k == EpisodeKind::Training ? "training" : "validation"; }

struct EpisodeRecord {
  int index = 0;
  EpisodeKind kind = EpisodeKind::Training;
  WinningSet winners;
  std::vector<CumulativeBallot> ballots;
  std::vector<double> rewards;
  /// Per-agent mini-batch loss; empty for validation episodes.
  std::vector<double> losses;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent seed per (run seed, agent, purpose).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t agent, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64((agent << 4) | stream));
}

enum Stream : std::uint64_t { kInitStream = 1, kActionStream = 2, kSampleStream = 3, kSubsampleStream = 4 };

/// Runs f(i) for i in [0, n) on up to `threads` workers; rethrows the first exception.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Uniform random subset of voters (kept in file order); the budget is unchanged.
inline ElectionInstance subsample_voters(const ElectionInstance& election, std::size_t count, std::uint64_t seed) {
  if (count > election.voters.size())
    throw Error(ErrorKind::ConfigError, "requested " + std::to_string(count) + " voters but the election has " +
                                            std::to_string(election.voters.size()));
  if (count == election.voters.size()) return election;
  std::vector<std::size_t> order(election.voters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(detail::stream_seed(seed, 0, detail::kSubsampleStream));
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);
  std::sort(order.begin(), order.end());
  ElectionInstance out = election;
  out.voters.clear();
  for (std::size_t i : order) out.voters.push_back(election.voters[i]);
  return out;
}

class Experiment {
 public:
  using Scalar = float;

  struct Agent {
    nn::QPolicy<Scalar> policy;
    std::optional<nn::QPolicy<Scalar>> target;
    nn::Optimizer<Scalar> optimizer;
    nn::ReplayBuffer buffer;
    std::mt19937_64 action_rng;
    std::mt19937_64 sample_rng;
    std::uint64_t updates = 0;
  };

  Experiment(const ElectionInstance& election, ExperimentConfig config) : config_(std::move(config)) {
    config_.validate();
    validate(election);
    election_ = config_.voter_subsample ? subsample_voters(election, *config_.voter_subsample, config_.seed) : election;
    if (election_.voters.empty()) throw Error(ErrorKind::DataError, "election has no voters");
    state_ = std::make_shared<const nn::StateVector>(nn::build_state(election_));

    nn::NetworkShape shape;
    shape.input = state_->size();
    shape.trunk_hidden = config_.trunk_hidden;
    shape.head_hidden = config_.head_hidden;
    shape.branches = static_cast<std::size_t>(election_.tokens_per_voter);
    shape.actions = election_.projects.size();

    agents_.reserve(election_.voters.size());
    for (std::size_t i = 0; i < election_.voters.size(); ++i) {
      agents_.push_back(Agent{nn::QPolicy<Scalar>::xavier(shape, detail::stream_seed(config_.seed, i, detail::kInitStream)),
                              std::nullopt, nn::Optimizer<Scalar>(config_.optimizer, config_.learning_rate),
                              nn::ReplayBuffer(config_.replay_capacity),
                              std::mt19937_64(detail::stream_seed(config_.seed, i, detail::kActionStream)),
                              std::mt19937_64(detail::stream_seed(config_.seed, i, detail::kSampleStream)), 0});
      if (config_.target_update > 0) agents_.back().target = agents_.back().policy;
    }
  }

  const ExperimentConfig& config() const { return config_; }
  /// The election the agents play: the input election restricted to the sampled voters.
  const ElectionInstance& election() const { return election_; }
  std::size_t agent_count() const { return agents_.size(); }
  const Agent& agent(std::size_t i) const { return agents_.at(i); }
  const nn::StateVector& state() const { return *state_; }
  int training_episodes_done() const { return training_done_; }

  /// Plays one episode. Training episodes explore with `epsilon` and update every agent;
  /// validation episodes act greedily and leave every agent untouched.
  EpisodeRecord play(EpisodeKind kind, double epsilon) {
    const std::size_t n = agents_.size();
    EpisodeRecord record;
    record.index = ++episodes_played_;
    record.kind = kind;
    const double eps = kind == EpisodeKind::Validation ? 0.0 : epsilon;

    std::vector<std::vector<std::size_t>> actions(n);
    VoteProfile profile;
    profile.ballots.resize(n);
    detail::parallel_for(n, config_.threads, [&](std::size_t i) {
      actions[i] = nn::select_action(agents_[i].policy, *state_, eps, agents_[i].action_rng);
      profile.ballots[i] = decode_action(actions[i], election_.projects.size());
    });
    for (const auto& v : election_.voters) profile.voter_ids.push_back(v.id);

    record.winners = aggregate(config_.rule, profile, election_);
    record.rewards.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      record.rewards[i] = reward({election_.voters[i], profile.ballots[i], record.winners, election_.tokens_per_voter},
                                 election_.projects, election_.cost_scale);

    if (kind == EpisodeKind::Training) {
      record.losses.resize(n);
      detail::parallel_for(n, config_.threads, [&](std::size_t i) {
        Agent& agent = agents_[i];
        agent.buffer.push(nn::Transition{state_, actions[i], record.rewards[i]});
        auto batch = nn::sample_minibatch(agent.buffer, config_.batch_size, agent.sample_rng, config_.recent_window);
        auto result = nn::compute_loss(agent.policy, std::span<const nn::Transition>(batch));
        agent.optimizer.step(agent.policy, result.gradients);
        ++agent.updates;
        if (agent.target && agent.updates % static_cast<std::uint64_t>(config_.target_update) == 0)
          agent.target = agent.policy;
        record.losses[i] = result.loss;
      });
      ++training_done_;
    }
    record.ballots = std::move(profile.ballots);
    return record;
  }

  /// Full schedule: `training_episodes` training episodes with a validation episode after
  /// every `validation_interval` of them. `on_record` sees each record as it completes.
  template <class Callback>
  std::vector<EpisodeRecord> run(Callback&& on_record) {
    std::vector<EpisodeRecord> records;
    for (int t = 1; t <= config_.training_episodes; ++t) {
      try {
        records.push_back(play(EpisodeKind::Training, config_.epsilon_at(t)));
        on_record(records.back());
        if (t % config_.validation_interval == 0) {
          records.push_back(play(EpisodeKind::Validation, 0.0));
          on_record(records.back());
        }
      } catch (const Error& e) {
        throw Error(e.kind(), "episode " + std::to_string(episodes_played_) + ": " + e.what());
      }
    }
    return records;
  }

  std::vector<EpisodeRecord> run() {
    return run([](const EpisodeRecord&) {});
  }

  /// Greedy episode outside the schedule (index 0); used for before/after snapshots.
  EpisodeRecord evaluate() {
    EpisodeRecord record = play(EpisodeKind::Validation, 0.0);
    --episodes_played_;
    record.index = 0;
    return record;
  }

  VoteProfile profile_of(const EpisodeRecord& record) const {
    VoteProfile profile;
    for (const auto& v : election_.voters) profile.voter_ids.push_back(v.id);
    profile.ballots = record.ballots;
    return profile;
  }

 private:
  ExperimentConfig config_;
  ElectionInstance election_;
  std::shared_ptr<const nn::StateVector> state_;
  std::vector<Agent> agents_;
  int episodes_played_ = 0;
  int training_done_ = 0;
};

inline std::vector<EpisodeRecord> run_experiment(const ElectionInstance& election, const ExperimentConfig& config) {
  Experiment experiment(election, config);
  return experiment.run();
}

inline std::vector<EpisodeRecord> run_experiment(const ExperimentConfig& config) {
  ElectionInstance election;
  try {
    election = load_election(config.election_path);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw Error(ErrorKind::DataError, e.what());
    throw;
  }
  return run_experiment(election, config);
}

/// One greedy episode of freshly initialised agents: the before-training baseline.
inline EpisodeRecord snapshot_untrained(const ElectionInstance& election, const ExperimentConfig& config) {
  Experiment experiment(election, config);
  return experiment.evaluate();
}

inline EpisodeRecord snapshot_untrained(const ExperimentConfig& config) {
  return snapshot_untrained(load_election(config.election_path), config);
}

/// One line of the per-episode training log.
struct LogRow {
  int episode = 0;
  EpisodeKind kind = EpisodeKind::Training;
  double mean_reward = 0.0, reward_q1 = 0.0, reward_q3 = 0.0;
  double mean_loss = 0.0, loss_q1 = 0.0, loss_q3 = 0.0;
};

namespace detail {

/// Linear-interpolation quantile of unsorted values.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

inline double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

/// Summaries across agents. Validation rows carry, per agent, the mean training loss over the
/// training episodes since the previous validation (the validation episode itself does not learn).
inline std::vector<LogRow> training_log(const std::vector<EpisodeRecord>& records) {
  std::vector<LogRow> rows;
  std::vector<std::vector<double>> window;
  for (const auto& r : records) {
    LogRow row;
    row.episode = r.index;
    row.kind = r.kind;
    row.mean_reward = detail::mean(r.rewards);
    row.reward_q1 = detail::quantile(r.rewards, 0.25);
    row.reward_q3 = detail::quantile(r.rewards, 0.75);
    std::vector<double> losses;
    if (r.kind == EpisodeKind::Training) {
      losses = r.losses;
      window.push_back(r.losses);
    } else {
      if (!window.empty()) {
        losses.assign(window.front().size(), 0.0);
        for (const auto& w : window)
          for (std::size_t i = 0; i < losses.size(); ++i) losses[i] += w[i] / static_cast<double>(window.size());
      }
      window.clear();
    }
    row.mean_loss = detail::mean(losses);
    row.loss_q1 = detail::quantile(losses, 0.25);
    row.loss_q3 = detail::quantile(losses, 0.75);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pbmarl
