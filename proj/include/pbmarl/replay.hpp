#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <random>
#include <vector>

#include "pbmarl/error.hpp"
#include "pbmarl/neural.hpp"

namespace pbmarl::nn {

/// Bounded per-agent experience store; the oldest transition is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorKind::ZeroDimension, "replay capacity must be positive");
  }

  void push(Transition t) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(t));
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  /// Index 0 is the oldest transition.
  const Transition& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

namespace detail {

template <class Rng>
void draw_from(std::size_t begin, std::size_t end, std::size_t count, bool replacement, Rng& rng,
               std::vector<std::size_t>& out) {
  std::uniform_int_distribution<std::size_t> pick(begin, end - 1);
  if (replacement) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(pick(rng));
    return;
  }
  const std::size_t first = out.size();
  while (out.size() - first < count) {
    std::size_t candidate = pick(rng);
    if (std::find(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(), candidate) == out.end())
      out.push_back(candidate);
  }
}

}  // namespace detail

/// Buffer positions of a recency-prioritised mini-batch: ceil(batch/2) from the newest
/// `recent_window` transitions, the rest from older ones. Sampling is with replacement
/// whenever a region is smaller than its share of the batch.
template <class Rng>
std::vector<std::size_t> sample_indices(const ReplayBuffer& buffer, std::size_t batch_size, Rng& rng,
                                        std::size_t recent_window = 32) {
  if (buffer.empty()) throw Error(ErrorKind::EmptyBuffer, "cannot sample an empty buffer");
  if (batch_size == 0) throw Error(ErrorKind::EmptyBatch, "batch size must be positive");
  const std::size_t len = buffer.size();
  const std::size_t window = std::min(std::max<std::size_t>(recent_window, 1), len);
  const std::size_t recent_begin = len - window;
  const bool short_buffer = len < batch_size;

  std::vector<std::size_t> out;
  out.reserve(batch_size);
  if (recent_begin == 0) {
    detail::draw_from(0, len, batch_size, short_buffer || window < batch_size, rng, out);
    return out;
  }
  const std::size_t recent_count = (batch_size + 1) / 2;
  const std::size_t old_count = batch_size - recent_count;
  detail::draw_from(recent_begin, len, recent_count, short_buffer || window < recent_count, rng, out);
  detail::draw_from(0, recent_begin, old_count, short_buffer || recent_begin < old_count, rng, out);
  return out;
}

template <class Rng>
std::vector<Transition> sample_minibatch(const ReplayBuffer& buffer, std::size_t batch_size, Rng& rng,
                                         std::size_t recent_window = 32) {
  std::vector<Transition> batch;
  for (std::size_t i : sample_indices(buffer, batch_size, rng, recent_window)) batch.push_back(buffer[i]);
  return batch;
}

}  // namespace pbmarl::nn
