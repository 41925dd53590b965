#include <gtest/gtest.h>

#include <cmath>

#include "pbmarl/training.hpp"
#include "support.hpp"

using namespace pbmarl;
using testing_support::make_election;

namespace {

ElectionInstance village() {
  return make_election({{"A", 100, {"x"}}, {"B", 100, {"y"}}, {"C", 100, {"y", "z"}}, {"D", 40, {"z"}}}, 150, 3,
                       {{{0, 3}}, {{1, 2}, {3, 1}}, {{2, 3}}, {{0, 1}, {3, 2}}, {{1, 1}}});
}

ExperimentConfig tiny_config(int episodes = 20) {
  ExperimentConfig c;
  c.training_episodes = episodes;
  c.batch_size = 4;
  c.trunk_hidden = {16};
  c.head_hidden = {8};
  c.seed = 3;
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Config, Validation) {
  auto c = tiny_config();
  c.validation_interval = 0;
  EXPECT_THROW(c.validate(), Error);
  c = tiny_config();
  c.training_episodes = 0;
  EXPECT_THROW(c.validate(), Error);
  c = tiny_config();
  c.discount = 0.9;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_THROW(Experiment(village(), c), Error);
}

TEST(Config, DefaultsAndEpsilonSchedule) {
  ExperimentConfig c;
  EXPECT_EQ(c.training_episodes, 400);
  EXPECT_EQ(c.validation_interval, 5);
  EXPECT_EQ(c.batch_size, 32u);
  EXPECT_DOUBLE_EQ(c.learning_rate, 0.001);
  EXPECT_EQ(c.discount, 0.0);
  EXPECT_DOUBLE_EQ(c.epsilon_at(1), 1.0);
  EXPECT_DOUBLE_EQ(c.epsilon_at(321), 0.05);
  EXPECT_DOUBLE_EQ(c.epsilon_at(400), 0.05);
  EXPECT_NEAR(c.epsilon_at(161), 0.525, 1e-12);
}

TEST(Experiment, ValidationCount) {
  auto c = tiny_config(400);
  c.trunk_hidden = {4};
  c.head_hidden = {};
  c.batch_size = 2;
  const auto records = run_experiment(village(), c);
  int validations = 0, training = 0;
  for (const auto& r : records) {
    if (r.kind == EpisodeKind::Validation) {
      ++validations;
      EXPECT_TRUE(r.losses.empty());
    } else {
      ++training;
      EXPECT_EQ(r.losses.size(), 5u);
    }
  }
  EXPECT_EQ(validations, 80);
  EXPECT_EQ(training, 400);
  EXPECT_EQ(records.size(), 480u);
  EXPECT_EQ(records[5].kind, EpisodeKind::Validation);
  EXPECT_EQ(records.back().index, 480);
}

TEST(Experiment, BuffersGrowAndValidationIsPure) {
  Experiment ex(village(), tiny_config());
  for (int t = 1; t <= 3; ++t) {
    ex.play(EpisodeKind::Training, 0.5);
    for (std::size_t i = 0; i < ex.agent_count(); ++i) EXPECT_EQ(ex.agent(i).buffer.size(), static_cast<std::size_t>(t));
  }
  std::vector<nn::QPolicy<float>> before;
  for (std::size_t i = 0; i < ex.agent_count(); ++i) before.push_back(ex.agent(i).policy);
  const auto v = ex.play(EpisodeKind::Validation, 0.9);
  for (std::size_t i = 0; i < ex.agent_count(); ++i) {
    EXPECT_TRUE(ex.agent(i).policy == before[i]);
    EXPECT_EQ(ex.agent(i).buffer.size(), 3u);
  }
  EXPECT_TRUE(v.losses.empty());
}

TEST(Experiment, EpisodeInvariants) {
  const auto e = village();
  Experiment ex(e, tiny_config());
  for (const auto& r : ex.run()) {
    EXPECT_LE(r.winners.total_cost, e.budget);
    for (const auto& b : r.ballots) EXPECT_EQ(b.total(), e.tokens_per_voter);
    for (double x : r.rewards) EXPECT_GE(x, 0.0);
  }
}

TEST(Experiment, Subsample) {
  const auto e = load_election(testing_support::data_dir() / "aarau_2023_surrogate.pb");
  auto c = tiny_config();
  c.voter_subsample = 25;
  Experiment ex(e, c);
  EXPECT_EQ(ex.agent_count(), 25u);
  EXPECT_EQ(ex.election().budget, e.budget);
  EXPECT_EQ(ex.election().projects.size(), e.projects.size());
  EXPECT_EQ(subsample_voters(e, 25, 3).voters[7].id, ex.election().voters[7].id);
  c.voter_subsample = 5000;
  EXPECT_THROW(Experiment(e, c), Error);
}

TEST(Experiment, SingleProjectIsTrivial) {
  const auto e = make_election({{"A", 100, {"x"}}}, 100, 4, {{{0, 1}}});
  const auto records = run_experiment(e, tiny_config(10));
  for (const auto& r : records) EXPECT_NEAR(r.rewards[0], std::log(100.0), 1e-12);
}

TEST(Experiment, SingleAgentLearnsToStackTokens) {
  // Only A overlaps the voter's area; the budget funds a single project.
  const auto e = make_election({{"A", 100, {"x"}}, {"B", 100, {"y"}}, {"C", 100, {"z"}}}, 100, 3, {{{0, 1}}});
  auto c = tiny_config(300);
  c.learning_rate = 0.01;
  c.batch_size = 8;
  Experiment ex(e, c);
  ex.run();
  const auto final = ex.evaluate();
  EXPECT_EQ(final.ballots[0].tokens_for(0), 3);
  EXPECT_NEAR(final.rewards[0], std::log(100.0), 1e-9);
}

TEST(Experiment, Deterministic) {
  auto c = tiny_config(30);
  c.threads = 2;
  const auto a = run_experiment(village(), c);
  c.threads = 1;
  const auto b = run_experiment(village(), c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].ballots, b[k].ballots);
    EXPECT_EQ(a[k].rewards, b[k].rewards);
    EXPECT_EQ(a[k].losses, b[k].losses);
  }
}

TEST(Experiment, UntrainedSnapshot) {
  const auto e = village();
  const auto a = snapshot_untrained(e, tiny_config());
  const auto b = snapshot_untrained(e, tiny_config());
  EXPECT_EQ(a.ballots, b.ballots);
  EXPECT_EQ(a.kind, EpisodeKind::Validation);
  for (const auto& ballot : a.ballots) EXPECT_EQ(ballot.total(), e.tokens_per_voter);
}

TEST(Experiment, RunFromMissingFileIsDataError) {
  auto c = tiny_config();
  c.election_path = "/nonexistent/file.pb";
  try {
    run_experiment(c);
    FAIL();
  } catch (const Error& ex) {
    EXPECT_EQ(ex.kind(), ErrorKind::DataError);
  }
}

TEST(TrainingLog, ValidationRowsCarryWindowedLoss) {
  std::vector<EpisodeRecord> recs(3);
  recs[0] = {1, EpisodeKind::Training, {}, {}, {1.0, 2.0}, {4.0, 2.0}};
  recs[1] = {2, EpisodeKind::Training, {}, {}, {1.0, 2.0}, {2.0, 0.0}};
  recs[2] = {3, EpisodeKind::Validation, {}, {}, {0.0, 4.0}, {}};
  const auto rows = training_log(recs);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[0].mean_loss, 3.0);
  EXPECT_DOUBLE_EQ(rows[2].mean_reward, 2.0);
  EXPECT_DOUBLE_EQ(rows[2].mean_loss, 2.0);
  EXPECT_DOUBLE_EQ(rows[2].loss_q1, 1.5);
  EXPECT_DOUBLE_EQ(rows[2].reward_q3, 3.0);
}
