// Copyright 2026 The Softgames Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOFTGAMES_DEEP_REPLAY_HPP_
#define SOFTGAMES_DEEP_REPLAY_HPP_

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "softgames/core/random.hpp"

namespace softgames::deep {

/// Fixed-capacity ring buffer; once full, the oldest item is overwritten.
template <typename T>
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayMemory: zero capacity");
    items_.reserve(capacity);
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t cursor() const { return cursor_; }
  const T& operator[](std::size_t i) const { return items_.at(i); }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[cursor_] = std::move(item);
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  /// Indices drawn uniformly, with replacement, from the filled portion.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const {
    if (items_.empty()) throw std::logic_error("ReplayMemory: sample from empty buffer");
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = uniform_index(rng, items_.size());
    return idx;
  }

  std::vector<const T*> sample(std::size_t n, Rng& rng) const {
    std::vector<const T*> batch;
    batch.reserve(n);
    for (std::size_t i : sample_indices(n, rng)) batch.push_back(&items_[i]);
    return batch;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<T> items_;
};

}  // namespace softgames::deep

#endif  // SOFTGAMES_DEEP_REPLAY_HPP_
