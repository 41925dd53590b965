#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gradcheck.hpp"
#include "pbmarl/neural.hpp"
#include "support.hpp"

using namespace pbmarl;
using namespace pbmarl::nn;

namespace {

NetworkShape linear_shape(std::size_t in, std::size_t branches, std::size_t actions) {
  NetworkShape s;
  s.input = in;
  s.trunk_hidden = {};
  s.head_hidden = {};
  s.branches = branches;
  s.actions = actions;
  return s;
}

NetworkShape small_shape() {
  NetworkShape s;
  s.input = 6;
  s.trunk_hidden = {8, 8};
  s.head_hidden = {5};
  s.branches = 3;
  s.actions = 4;
  return s;
}

StateVector state_of(std::initializer_list<double> v) { return StateVector{std::vector<double>(v)}; }

}  // namespace

TEST(Network, XavierBoundsAndZeroBiases) {
  auto p = QPolicy<double>::xavier(linear_shape(4, 1, 3), 9);
  const auto& layer = p.parameters().heads[0][0];
  ASSERT_EQ(layer.weights.size(), 12);
  const double bound = std::sqrt(6.0 / 7.0);
  EXPECT_NEAR(bound, 0.9258, 1e-4);
  for (Eigen::Index i = 0; i < layer.weights.size(); ++i) EXPECT_LE(std::fabs(layer.weights.data()[i]), bound);
  EXPECT_TRUE(layer.biases.isZero());

  auto big = QPolicy<double>::xavier(small_shape(), 9);
  big.parameters().for_each_layer([](const DenseLayer<double>& l) {
    const double b = std::sqrt(6.0 / static_cast<double>(l.inputs() + l.outputs()));
    EXPECT_LE(l.weights.cwiseAbs().maxCoeff(), b);
    EXPECT_TRUE(l.biases.isZero());
  });
}

TEST(Network, InitIsDeterministic) {
  EXPECT_TRUE(QPolicy<double>::xavier(small_shape(), 4) == QPolicy<double>::xavier(small_shape(), 4));
  EXPECT_FALSE(QPolicy<double>::xavier(small_shape(), 4) == QPolicy<double>::xavier(small_shape(), 5));
}

TEST(Network, ZeroDimensionRejected) {
  auto s = small_shape();
  s.actions = 0;
  EXPECT_THROW(QPolicy<double>::xavier(s, 1), Error);
  s = small_shape();
  s.trunk_hidden = {0};
  EXPECT_THROW(QPolicy<double>::zeros(s), Error);
}

TEST(Network, ZeroWeightsGiveZeroQ) {
  const auto p = QPolicy<double>::zeros(small_shape());
  EXPECT_TRUE(p.forward(state_of({1, 2, 3, 4, 5, 6})).isZero());
}

TEST(Network, HandAffineMap) {
  auto p = QPolicy<double>::zeros(linear_shape(2, 1, 2));
  auto& l = p.parameters().heads[0][0];
  l.weights << 1, 0, 2, -1;
  l.biases << 0.5, -0.5;
  const auto q = p.forward(state_of({3, 4}));
  EXPECT_DOUBLE_EQ(q(0, 0), 3.5);
  EXPECT_DOUBLE_EQ(q(1, 0), 1.5);
}

TEST(Network, OutputShapeAndDimensionCheck) {
  NetworkShape s;
  s.input = 330;
  s.branches = 10;
  s.actions = 33;
  const auto p = QPolicy<float>::xavier(s, 1);
  StateVector x{std::vector<double>(330, 0.5)};
  const auto q = p.forward(x);
  EXPECT_EQ(q.rows(), 33);
  EXPECT_EQ(q.cols(), 10);
  EXPECT_TRUE(q.allFinite());
  EXPECT_THROW(p.forward(state_of({1, 2})), Error);
}

TEST(Network, BranchIndependenceAndTrunkSharing) {
  auto p = QPolicy<double>::xavier(small_shape(), 2);
  const auto x = state_of({0.3, -0.2, 0.9, 0.1, 0.5, -0.7});
  const auto before = p.forward(x);

  auto head = p;
  head.parameters().heads[1].back().biases.array() += 1.0;
  const auto after_head = head.forward(x);
  EXPECT_EQ(after_head.col(0), before.col(0));
  EXPECT_NE(after_head.col(1), before.col(1));
  EXPECT_EQ(after_head.col(2), before.col(2));

  auto trunk = p;
  trunk.parameters().trunk.back().biases.array() += 1.0;
  const auto after_trunk = trunk.forward(x);
  for (Eigen::Index d = 0; d < 3; ++d) EXPECT_NE(after_trunk.col(d), before.col(d));
}

TEST(Policy, GreedyArgmaxLowestIndexOnTies) {
  auto p = QPolicy<double>::zeros(linear_shape(1, 2, 3));
  p.parameters().heads[0][0].biases << 1, 5, 5;
  p.parameters().heads[1][0].biases << 2, 2, 2;
  std::mt19937_64 rng(0);
  const auto before = rng;
  EXPECT_EQ(select_action(p, state_of({0}), 0.0, rng), (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(rng, before);
}

TEST(Policy, FullExplorationIsUniform) {
  const auto p = QPolicy<double>::zeros(linear_shape(1, 1, 5));
  std::mt19937_64 rng(77);
  std::vector<int> counts(5, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[select_action(p, state_of({0}), 1.0, rng)[0]];
  const double expected = draws / 5.0, sigma = std::sqrt(draws * 0.2 * 0.8);
  for (int c : counts) EXPECT_LE(std::fabs(c - expected), 3 * sigma);
}

TEST(Policy, SeededActionsReproduce) {
  const auto p = QPolicy<double>::xavier(small_shape(), 3);
  const auto x = state_of({1, 0, 1, 0, 1, 0});
  std::mt19937_64 a(8), b(8);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(select_action(p, x, 0.5, a), select_action(p, x, 0.5, b));
}

TEST(Loss, ExactTargetsGiveZero) {
  auto p = QPolicy<double>::zeros(linear_shape(1, 2, 3));
  p.parameters().heads[0][0].biases << 0, 1.5, 0;
  p.parameters().heads[1][0].biases << 1.5, 0, 0;
  auto s = std::make_shared<const StateVector>(state_of({1}));
  std::vector<Transition> batch{{s, {1, 0}, 1.5}};
  EXPECT_DOUBLE_EQ(compute_loss(p, std::span<const Transition>(batch)).loss, 0.0);
}

TEST(Loss, HandExample) {
  auto p = QPolicy<double>::zeros(linear_shape(1, 2, 2));
  p.parameters().heads[0][0].biases << 0, 7;
  p.parameters().heads[1][0].biases << 7, 2;
  auto s = std::make_shared<const StateVector>(state_of({1}));
  std::vector<Transition> batch{{s, {0, 1}, 1.0}};
  const auto out = compute_loss(p, std::span<const Transition>(batch));
  EXPECT_DOUBLE_EQ(out.loss, 1.0);
  // Only the chosen outputs receive gradient: d/dQ = -2 (r - Q) / T.
  EXPECT_DOUBLE_EQ(out.gradients.heads[0][0].biases(0), -1.0);
  EXPECT_DOUBLE_EQ(out.gradients.heads[0][0].biases(1), 0.0);
  EXPECT_DOUBLE_EQ(out.gradients.heads[1][0].biases(1), 1.0);
  EXPECT_DOUBLE_EQ(out.gradients.heads[1][0].biases(0), 0.0);
}

TEST(Loss, EmptyBatchAndBadAction) {
  const auto p = QPolicy<double>::zeros(linear_shape(1, 2, 2));
  std::vector<Transition> none;
  EXPECT_THROW(compute_loss(p, std::span<const Transition>(none)), Error);
  auto s = std::make_shared<const StateVector>(state_of({1}));
  std::vector<Transition> bad{{s, {0, 5}, 1.0}};
  EXPECT_THROW(compute_loss(p, std::span<const Transition>(bad)), Error);
}

TEST(Loss, SharedStatesMatchSeparateCopies) {
  std::mt19937_64 rng(12);
  auto c = testing_support::random_grad_case(rng);
  auto copies = c.batch;
  for (auto& t : copies) t.state = std::make_shared<const StateVector>(*t.state);
  const auto a = compute_loss(c.policy, std::span<const Transition>(c.batch));
  const auto b = compute_loss(c.policy, std::span<const Transition>(copies));
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  const std::size_t n = a.gradients.parameter_count();
  auto ga = a.gradients, gb = b.gradients;
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ga.at(i), gb.at(i), 1e-12);
}

TEST(Loss, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2024);
  for (int net = 0; net < 100; ++net) {
    auto c = testing_support::random_grad_case(rng);
    EXPECT_LT(testing_support::max_gradient_error(c), 1e-4) << "network " << net;
  }
}

TEST(Optimizer, ZeroGradientLeavesParameters) {
  for (auto kind : {OptimizerKind::Adam, OptimizerKind::Sgd}) {
    auto p = QPolicy<double>::xavier(small_shape(), 6);
    const auto before = p;
    Optimizer<double> opt(kind, 0.001);
    opt.step(p, p.parameters().zeros_like());
    EXPECT_TRUE(p == before);
  }
}

TEST(Optimizer, SgdStepIsExact) {
  auto p = QPolicy<double>::xavier(small_shape(), 6);
  const auto before = p;
  auto g = p.parameters().zeros_like();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  const std::size_t count = g.parameter_count();
  for (std::size_t i = 0; i < count; ++i) g.at(i) = n(rng);
  Optimizer<double> opt(OptimizerKind::Sgd, 0.001);
  opt.step(p, g);
  auto b = before;
  for (std::size_t i = 0; i < count; ++i) EXPECT_EQ(p.parameters().at(i), b.parameters().at(i) - 0.001 * g.at(i));
}

TEST(Optimizer, ShapeMismatch) {
  auto p = QPolicy<double>::xavier(small_shape(), 6);
  auto other = small_shape();
  other.actions = 9;
  Optimizer<double> opt(OptimizerKind::Adam, 0.001);
  EXPECT_THROW(opt.step(p, QPolicy<double>::zeros(other).parameters()), Error);
}

TEST(Optimizer, OverfitsOneBatch) {
  for (auto kind : {OptimizerKind::Adam, OptimizerKind::Sgd}) {
    auto p = QPolicy<double>::xavier(small_shape(), 10);
    auto s = std::make_shared<const StateVector>(state_of({0.2, 0.4, 0.1, 0.9, 0.3, 0.6}));
    std::vector<Transition> batch{{s, {0, 1, 2}, 2.0}, {s, {3, 3, 3}, 0.5}, {s, {1, 0, 2}, 1.0}};
    Optimizer<double> opt(kind, kind == OptimizerKind::Adam ? 0.001 : 0.01);
    double last = compute_loss(p, std::span<const Transition>(batch)).loss;
    for (int step = 0; step < 50; ++step) {
      auto out = compute_loss(p, std::span<const Transition>(batch));
      opt.step(p, out.gradients);
      const double now = compute_loss(p, std::span<const Transition>(batch)).loss;
      EXPECT_LT(now, last) << "step " << step;
      last = now;
    }
  }
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto p = QPolicy<float>::xavier(small_shape(), 33);
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  save_policy(buf, p);
  const auto q = load_policy<float>(buf);
  EXPECT_TRUE(p == q);
  EXPECT_EQ(q.shape(), p.shape());

  std::stringstream again(std::ios::in | std::ios::out | std::ios::binary);
  save_policy(again, p);
  EXPECT_THROW(load_policy<double>(again), Error);
  std::stringstream junk("not a checkpoint");
  EXPECT_THROW(load_policy<float>(junk), Error);
}

TEST(State, BlocksOfNormalisedLogCostAndIndicators) {
  const auto e = testing_support::make_election(
      {{"A", 10, {"x"}}, {"B", 100, {"x", "y"}}}, 100, 2, {{{0, 1}}});
  const auto s = build_state(e);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_DOUBLE_EQ(s.values[0], std::log(10.0) / std::log(100.0));
  EXPECT_EQ(s.values[1], 1.0);
  EXPECT_EQ(s.values[2], 0.0);
  EXPECT_DOUBLE_EQ(s.values[3], 1.0);
  EXPECT_EQ(s.values[4], 1.0);
  EXPECT_EQ(s.values[5], 1.0);
}
