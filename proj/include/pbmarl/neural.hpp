#pragma once

// Branching Q-network: a shared fully connected trunk feeding T independent
// heads, each emitting one Q-value per project. Hidden layers use ReLU; the
// head outputs are linear.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pbmarl/election.hpp"
#include "pbmarl/error.hpp"

namespace pbmarl::nn {

/// Observation of the (fixed) election: per project [ln(cost)/max ln(cost), impact-area indicators].
struct StateVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

inline StateVector build_state(const ElectionInstance& election) {
  const std::size_t k = election.impact_areas.size();
  double max_log = 0.0;
  for (std::size_t p = 0; p < election.projects.size(); ++p)
    max_log = std::max(max_log, std::log(election.cost_in_currency(p)));
  if (max_log <= 0.0) max_log = 1.0;

  StateVector state;
  state.values.reserve(election.projects.size() * (1 + k));
  for (std::size_t p = 0; p < election.projects.size(); ++p) {
    state.values.push_back(std::log(election.cost_in_currency(p)) / max_log);
    for (const auto& area : election.impact_areas)
      state.values.push_back(election.projects[p].impact_areas.count(area) ? 1.0 : 0.0);
  }
  return state;
}

struct NetworkShape {
  std::size_t input = 0;
  std::vector<std::size_t> trunk_hidden{128, 128};
  std::vector<std::size_t> head_hidden{64};
  std::size_t branches = 0;  // T
  std::size_t actions = 0;   // P

  std::size_t trunk_output() const { return trunk_hidden.empty() ? input : trunk_hidden.back(); }
  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

template <class Scalar>
struct DenseLayer {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix weights;  // out x in
  Vector biases;

  std::size_t inputs() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t outputs() const { return static_cast<std::size_t>(weights.rows()); }

  static DenseLayer zeros(std::size_t in, std::size_t out) {
    return {Matrix::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
            Vector::Zero(static_cast<Eigen::Index>(out))};
  }
};

/// All trainable tensors of a branching network; also used for gradients and optimizer moments.
template <class Scalar>
struct Parameters {
  std::vector<DenseLayer<Scalar>> trunk;
  std::vector<std::vector<DenseLayer<Scalar>>> heads;

  template <class F>
  void for_each_layer(F&& f) {
    for (auto& layer : trunk) f(layer);
    for (auto& head : heads)
      for (auto& layer : head) f(layer);
  }
  template <class F>
  void for_each_layer(F&& f) const {
    for (const auto& layer : trunk) f(layer);
    for (const auto& head : heads)
      for (const auto& layer : head) f(layer);
  }

  Parameters zeros_like() const {
    Parameters out;
    for (const auto& l : trunk) out.trunk.push_back(DenseLayer<Scalar>::zeros(l.inputs(), l.outputs()));
    for (const auto& head : heads) {
      auto& h = out.heads.emplace_back();
      for (const auto& l : head) h.push_back(DenseLayer<Scalar>::zeros(l.inputs(), l.outputs()));
    }
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for_each_layer([&n](const auto& l) { n += static_cast<std::size_t>(l.weights.size() + l.biases.size()); });
    return n;
  }

  /// Flat view `index`-th scalar in layer order (weights column-major, then biases).
  Scalar& at(std::size_t index) {
    Scalar* found = nullptr;
    for_each_layer([&](auto& l) {
      if (found) return;
      const auto w = static_cast<std::size_t>(l.weights.size());
      if (index < w) {
        found = l.weights.data() + index;
        return;
      }
      index -= w;
      const auto b = static_cast<std::size_t>(l.biases.size());
      if (index < b) {
        found = l.biases.data() + index;
        return;
      }
      index -= b;
    });
    if (!found) throw Error(ErrorKind::IndexOutOfRange, "parameter index out of range");
    return *found;
  }
};

/// Pairs layers of two parameter sets of equal shape; throws ShapeMismatch on any disagreement
/// before `f` sees a single pair.
template <class A, class B, class F>
void zip_layers(A& a, B& b, F&& f) {
  if (a.trunk.size() != b.trunk.size() || a.heads.size() != b.heads.size())
    throw Error(ErrorKind::ShapeMismatch, "layer count differs");
  auto same = [](const auto& x, const auto& y) {
    return x.weights.rows() == y.weights.rows() && x.weights.cols() == y.weights.cols() &&
           x.biases.size() == y.biases.size();
  };
  for (std::size_t i = 0; i < a.trunk.size(); ++i)
    if (!same(a.trunk[i], b.trunk[i])) throw Error(ErrorKind::ShapeMismatch, "trunk layer dimensions differ");
  for (std::size_t h = 0; h < a.heads.size(); ++h) {
    if (a.heads[h].size() != b.heads[h].size()) throw Error(ErrorKind::ShapeMismatch, "head depth differs");
    for (std::size_t i = 0; i < a.heads[h].size(); ++i)
      if (!same(a.heads[h][i], b.heads[h][i])) throw Error(ErrorKind::ShapeMismatch, "head layer dimensions differ");
  }
  for (std::size_t i = 0; i < a.trunk.size(); ++i) f(a.trunk[i], b.trunk[i]);
  for (std::size_t h = 0; h < a.heads.size(); ++h)
    for (std::size_t i = 0; i < a.heads[h].size(); ++i) f(a.heads[h][i], b.heads[h][i]);
}

template <class Scalar>
using QValues = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;  // P x T, column d = head d

template <class Scalar = double>
class QPolicy {
 public:
  using Matrix = typename DenseLayer<Scalar>::Matrix;
  using Vector = typename DenseLayer<Scalar>::Vector;

  QPolicy() = default;

  /// All-zero network of the given shape.
  static QPolicy zeros(const NetworkShape& shape) {
    check_shape(shape);
    QPolicy policy;
    policy.shape_ = shape;
    std::size_t width = shape.input;
    for (std::size_t h : shape.trunk_hidden) {
      policy.params_.trunk.push_back(DenseLayer<Scalar>::zeros(width, h));
      width = h;
    }
    for (std::size_t d = 0; d < shape.branches; ++d) {
      auto& head = policy.params_.heads.emplace_back();
      std::size_t w = width;
      for (std::size_t h : shape.head_hidden) {
        head.push_back(DenseLayer<Scalar>::zeros(w, h));
        w = h;
      }
      head.push_back(DenseLayer<Scalar>::zeros(w, shape.actions));
    }
    return policy;
  }

  /// Xavier-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
  static QPolicy xavier(const NetworkShape& shape, std::uint64_t seed) {
    QPolicy policy = zeros(shape);
    std::mt19937_64 rng(seed);
    policy.params_.for_each_layer([&rng](DenseLayer<Scalar>& layer) {
      const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs() + layer.outputs()));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = static_cast<Scalar>(dist(rng));
    });
    return policy;
  }

  const NetworkShape& shape() const { return shape_; }
  Parameters<Scalar>& parameters() { return params_; }
  const Parameters<Scalar>& parameters() const { return params_; }

  QValues<Scalar> forward(const StateVector& state) const {
    const StateVector* ptr = &state;
    Matrix x = to_matrix(std::span<const StateVector* const>(&ptr, 1));
    Activations acts = forward_batch(x);
    QValues<Scalar> q(static_cast<Eigen::Index>(shape_.actions), static_cast<Eigen::Index>(shape_.branches));
    for (std::size_t d = 0; d < shape_.branches; ++d) q.col(static_cast<Eigen::Index>(d)) = acts.heads[d].back().col(0);
    return q;
  }

  /// Layer outputs of one forward pass over a batch of column states.
  struct Activations {
    std::vector<Matrix> trunk;               // trunk[0] = input, then each hidden output
    std::vector<std::vector<Matrix>> heads;  // heads[d][0] = trunk output, ..., back() = Q-values
  };

  Activations forward_batch(const Matrix& x) const {
    if (static_cast<std::size_t>(x.rows()) != shape_.input)
      throw Error(ErrorKind::DimensionMismatch,
                  "state width " + std::to_string(x.rows()) + " != network input " + std::to_string(shape_.input));
    Activations acts;
    acts.trunk.push_back(x);
    for (const auto& layer : params_.trunk) {
      Matrix z = (layer.weights * acts.trunk.back()).colwise() + layer.biases;
      acts.trunk.push_back(z.cwiseMax(Scalar(0)));
    }
    acts.heads.resize(params_.heads.size());
    for (std::size_t d = 0; d < params_.heads.size(); ++d) {
      const auto& head = params_.heads[d];
      auto& out = acts.heads[d];
      out.push_back(acts.trunk.back());
      for (std::size_t i = 0; i < head.size(); ++i) {
        Matrix z = (head[i].weights * out.back()).colwise() + head[i].biases;
        if (i + 1 < head.size()) z = z.cwiseMax(Scalar(0));
        out.push_back(std::move(z));
      }
    }
    return acts;
  }

  Matrix to_matrix(std::span<const StateVector* const> states) const {
    Matrix x(static_cast<Eigen::Index>(shape_.input), static_cast<Eigen::Index>(states.size()));
    for (std::size_t c = 0; c < states.size(); ++c) {
      if (states[c]->size() != shape_.input)
        throw Error(ErrorKind::DimensionMismatch, "state width " + std::to_string(states[c]->size()) +
                                                      " != network input " + std::to_string(shape_.input));
      for (std::size_t r = 0; r < shape_.input; ++r)
        x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = static_cast<Scalar>(states[c]->values[r]);
    }
    return x;
  }

  friend bool operator==(const QPolicy& a, const QPolicy& b) {
    if (!(a.shape_ == b.shape_)) return false;
    bool equal = true;
    zip_layers(a.params_, b.params_, [&equal](const auto& x, const auto& y) {
      equal = equal && x.weights == y.weights && x.biases == y.biases;
    });
    return equal;
  }

 private:
  static void check_shape(const NetworkShape& shape) {
    if (shape.input == 0 || shape.branches == 0 || shape.actions == 0)
      throw Error(ErrorKind::ZeroDimension, "network dimensions must be positive");
    for (std::size_t h : shape.trunk_hidden)
      if (h == 0) throw Error(ErrorKind::ZeroDimension, "trunk layer width 0");
    for (std::size_t h : shape.head_hidden)
      if (h == 0) throw Error(ErrorKind::ZeroDimension, "head layer width 0");
  }

  NetworkShape shape_;
  Parameters<Scalar> params_;
};

/// Index of the largest value; the lowest index wins ties.
template <class Derived>
std::size_t argmax(const Eigen::MatrixBase<Derived>& column) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < column.size(); ++i)
    if (column(i) > column(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  return best;
}

/// Per branch: a uniform random project with probability epsilon, otherwise the head's argmax.
template <class Scalar, class Rng>
std::vector<std::size_t> select_action(const QPolicy<Scalar>& policy, const StateVector& state, double epsilon,
                                       Rng& rng) {
  const QValues<Scalar> q = policy.forward(state);
  const std::size_t actions = policy.shape().actions;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, actions - 1);
  std::vector<std::size_t> choice(policy.shape().branches);
  for (std::size_t d = 0; d < choice.size(); ++d) {
    if (epsilon > 0.0 && coin(rng) < epsilon)
      choice[d] = pick(rng);
    else
      choice[d] = argmax(q.col(static_cast<Eigen::Index>(d)));
  }
  return choice;
}

/// One stored experience. There is no next state: the regression target is the immediate reward.
struct Transition {
  std::shared_ptr<const StateVector> state;
  std::vector<std::size_t> action;
  double reward = 0.0;
};

template <class Scalar>
struct LossAndGradients {
  double loss = 0.0;
  Parameters<Scalar> gradients;
};

/// L = mean over the batch of (1/T) sum_d (r - Q_d(s, a_d))^2, with gradients of L
/// w.r.t. every parameter. Transitions sharing a state object are forwarded once.
template <class Scalar>
LossAndGradients<Scalar> compute_loss(const QPolicy<Scalar>& policy, std::span<const Transition> batch) {
  using Matrix = typename QPolicy<Scalar>::Matrix;
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "loss of an empty batch");
  const auto& shape = policy.shape();
  const auto& params = policy.parameters();

  std::vector<const StateVector*> unique;
  std::unordered_map<const StateVector*, std::size_t> column_of;
  std::vector<std::size_t> column(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const StateVector* s = batch[b].state.get();
    if (!s) throw Error(ErrorKind::DimensionMismatch, "transition without state");
    if (batch[b].action.size() != shape.branches)
      throw Error(ErrorKind::DimensionMismatch, "action has " + std::to_string(batch[b].action.size()) + " branches");
    auto [it, inserted] = column_of.emplace(s, unique.size());
    if (inserted) unique.push_back(s);
    column[b] = it->second;
  }

  const Matrix x = policy.to_matrix(unique);
  const auto acts = policy.forward_batch(x);
  const auto m = static_cast<Eigen::Index>(unique.size());
  const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(shape.branches));

  LossAndGradients<Scalar> out;
  out.gradients = params.zeros_like();

  std::vector<Matrix> output_grad(shape.branches, Matrix::Zero(static_cast<Eigen::Index>(shape.actions), m));
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto c = static_cast<Eigen::Index>(column[b]);
    for (std::size_t d = 0; d < shape.branches; ++d) {
      const std::size_t a = batch[b].action[d];
      if (a >= shape.actions) throw Error(ErrorKind::IndexOutOfRange, "action index " + std::to_string(a));
      const double q = static_cast<double>(acts.heads[d].back()(static_cast<Eigen::Index>(a), c));
      const double diff = batch[b].reward - q;
      loss += diff * diff;
      output_grad[d](static_cast<Eigen::Index>(a), c) += static_cast<Scalar>(-2.0 * diff * scale);
    }
  }
  out.loss = loss * scale;

  const bool trunk_is_relu = !params.trunk.empty();
  Matrix trunk_grad = Matrix::Zero(static_cast<Eigen::Index>(shape.trunk_output()), m);
  for (std::size_t d = 0; d < shape.branches; ++d) {
    const auto& head = params.heads[d];
    auto& grads = out.gradients.heads[d];
    Matrix g = std::move(output_grad[d]);
    for (std::size_t i = head.size(); i-- > 0;) {
      const Matrix& input = acts.heads[d][i];
      grads[i].weights.noalias() += g * input.transpose();
      grads[i].biases += g.rowwise().sum();
      Matrix back = head[i].weights.transpose() * g;
      if (i > 0 || trunk_is_relu) back = back.cwiseProduct((input.array() > Scalar(0)).template cast<Scalar>().matrix());
      g = std::move(back);
    }
    trunk_grad += g;
  }
  for (std::size_t i = params.trunk.size(); i-- > 0;) {
    const Matrix& input = acts.trunk[i];
    out.gradients.trunk[i].weights.noalias() += trunk_grad * input.transpose();
    out.gradients.trunk[i].biases += trunk_grad.rowwise().sum();
    if (i == 0) break;
    Matrix back = params.trunk[i].weights.transpose() * trunk_grad;
    trunk_grad = back.cwiseProduct((input.array() > Scalar(0)).template cast<Scalar>().matrix());
  }
  return out;
}

enum class OptimizerKind { Adam, Sgd };

inline OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "adam") return OptimizerKind::Adam;
  if (text == "sgd") return OptimizerKind::Sgd;
  throw Error(ErrorKind::ConfigError, "unknown optimizer '" + std::string(text) + "' (expected adam|sgd)");
}

/// Adam (beta1 0.9, beta2 0.999, eps 1e-8) or plain gradient descent.
template <class Scalar>
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), learning_rate_(learning_rate) {}

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return learning_rate_; }
  std::uint64_t steps() const { return steps_; }

  void step(QPolicy<Scalar>& policy, const Parameters<Scalar>& gradients) {
    auto& params = policy.parameters();
    const auto& grads = gradients;
    if (kind_ == OptimizerKind::Sgd) {
      const auto lr = static_cast<Scalar>(learning_rate_);
      zip_layers(params, grads, [lr](DenseLayer<Scalar>& p, const DenseLayer<Scalar>& g) {
        p.weights -= lr * g.weights;
        p.biases -= lr * g.biases;
      });
      ++steps_;
      return;
    }
    zip_layers(params, grads, [](auto&, auto&) {});
    if (first_.trunk.empty() && first_.heads.empty()) {
      first_ = params.zeros_like();
      second_ = params.zeros_like();
    }
    ++steps_;
    const double correction1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
    const double correction2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
    const auto step_size = static_cast<Scalar>(learning_rate_ / correction1);
    const auto inv_sqrt_c2 = static_cast<Scalar>(1.0 / std::sqrt(correction2));
    const auto b1 = static_cast<Scalar>(kBeta1), b2 = static_cast<Scalar>(kBeta2), eps = static_cast<Scalar>(kEpsilon);

    std::vector<DenseLayer<Scalar>*> m_layers, v_layers;
    first_.for_each_layer([&m_layers](DenseLayer<Scalar>& l) { m_layers.push_back(&l); });
    second_.for_each_layer([&v_layers](DenseLayer<Scalar>& l) { v_layers.push_back(&l); });
    std::size_t k = 0;
    zip_layers(params, grads, [&](DenseLayer<Scalar>& p, const DenseLayer<Scalar>& g) {
      auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
        m = b1 * m + (Scalar(1) - b1) * grad;
        v = b2 * v + (Scalar(1) - b2) * grad.cwiseProduct(grad);
        param.array() -= step_size * m.array() / ((v.array().sqrt() * inv_sqrt_c2) + eps);
      };
      update(p.weights, g.weights, m_layers[k]->weights, v_layers[k]->weights);
      update(p.biases, g.biases, m_layers[k]->biases, v_layers[k]->biases);
      ++k;
    });
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  OptimizerKind kind_;
  double learning_rate_;
  std::uint64_t steps_ = 0;
  Parameters<Scalar> first_, second_;
};

// Checkpoint: "PBMQNET1", u32 scalar width, u64 input/branches/actions, u64 counts and
// widths of trunk and head hidden layers, then every layer's weights (column-major)
// and biases as raw little-endian scalars.
namespace detail {

template <class T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorKind::Io, "truncated policy checkpoint");
  return value;
}

inline constexpr char kCheckpointMagic[8] = {'P', 'B', 'M', 'Q', 'N', 'E', 'T', '1'};

}  // namespace detail

template <class Scalar>
void save_policy(std::ostream& out, const QPolicy<Scalar>& policy) {
  const auto& shape = policy.shape();
  out.write(detail::kCheckpointMagic, sizeof(detail::kCheckpointMagic));
  detail::write_pod<std::uint32_t>(out, sizeof(Scalar));
  detail::write_pod<std::uint64_t>(out, shape.input);
  detail::write_pod<std::uint64_t>(out, shape.branches);
  detail::write_pod<std::uint64_t>(out, shape.actions);
  detail::write_pod<std::uint64_t>(out, shape.trunk_hidden.size());
  for (auto w : shape.trunk_hidden) detail::write_pod<std::uint64_t>(out, w);
  detail::write_pod<std::uint64_t>(out, shape.head_hidden.size());
  for (auto w : shape.head_hidden) detail::write_pod<std::uint64_t>(out, w);
  policy.parameters().for_each_layer([&out](const DenseLayer<Scalar>& l) {
    out.write(reinterpret_cast<const char*>(l.weights.data()), static_cast<std::streamsize>(l.weights.size() * sizeof(Scalar)));
    out.write(reinterpret_cast<const char*>(l.biases.data()), static_cast<std::streamsize>(l.biases.size() * sizeof(Scalar)));
  });
  if (!out) throw Error(ErrorKind::Io, "failed to write policy checkpoint");
}

template <class Scalar>
QPolicy<Scalar> load_policy(std::istream& in) {
  char magic[sizeof(detail::kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, detail::kCheckpointMagic, sizeof(magic)) != 0)
    throw Error(ErrorKind::Io, "not a policy checkpoint");
  if (detail::read_pod<std::uint32_t>(in) != sizeof(Scalar))
    throw Error(ErrorKind::ShapeMismatch, "checkpoint scalar width differs");
  NetworkShape shape;
  shape.input = detail::read_pod<std::uint64_t>(in);
  shape.branches = detail::read_pod<std::uint64_t>(in);
  shape.actions = detail::read_pod<std::uint64_t>(in);
  shape.trunk_hidden.resize(detail::read_pod<std::uint64_t>(in));
  for (auto& w : shape.trunk_hidden) w = detail::read_pod<std::uint64_t>(in);
  shape.head_hidden.resize(detail::read_pod<std::uint64_t>(in));
  for (auto& w : shape.head_hidden) w = detail::read_pod<std::uint64_t>(in);
  auto policy = QPolicy<Scalar>::zeros(shape);
  policy.parameters().for_each_layer([&in](DenseLayer<Scalar>& l) {
    in.read(reinterpret_cast<char*>(l.weights.data()), static_cast<std::streamsize>(l.weights.size() * sizeof(Scalar)));
    in.read(reinterpret_cast<char*>(l.biases.data()), static_cast<std::streamsize>(l.biases.size() * sizeof(Scalar)));
  });
  if (!in) throw Error(ErrorKind::Io, "truncated policy checkpoint");
  return policy;
}

}  // namespace pbmarl::nn
