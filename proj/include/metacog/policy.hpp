// SPDX-License-Identifier: Apache-2.0
#pragma once

// Explicit autoregressive softmax policy over a small vocabulary. The logit
// table is the full parameter vector, which keeps every distribution, path
// probability, and gradient exact.

#include <span>
#include <vector>

#include "metacog/rng.hpp"
#include "metacog/types.hpp"

namespace metacog {

struct PolicyShape {
  int vocab_size = 4;  // >= 2
  int horizon = 2;     // >= 1
  int memory = 0;      // 0: one row per position; 1: condition on previous token
};

class ToyPolicy {
 public:
  explicit ToyPolicy(PolicyShape shape);

  /// Logits drawn iid from N(0, stddev^2).
  static ToyPolicy random(PolicyShape shape, Scalar stddev, Rng& rng);

  const PolicyShape& shape() const { return shape_; }
  int vocab_size() const { return shape_.vocab_size; }
  int horizon() const { return shape_.horizon; }

  Index rows() const { return logits_.rows(); }
  Index parameter_count() const { return logits_.size(); }

  /// Row of the logit table governing position t after `prev` (-1 at t = 0).
  Index row_index(int t, int prev) const;

  /// Rows visited by a token path, one per position.
  std::vector<Index> path_rows(std::span<const int> tokens) const;

  Vector probabilities(Index row) const;
  Vector log_probabilities(Index row) const;

  Scalar path_log_prob(std::span<const int> tokens) const;

  Matrix& logits() { return logits_; }
  const Matrix& logits() const { return logits_; }

  /// Flattened parameter index of (row, token).
  Index param_index(Index row, Index token) const {
    return row * shape_.vocab_size + token;
  }

  /// Gradient-descent update on the flattened logit table.
  void apply_update(const Vector& gradient, Scalar learning_rate);

  /// Overwrite one parameter (finite-difference probes).
  Scalar& param(Index flat) { return logits_(flat / shape_.vocab_size, flat % shape_.vocab_size); }
  Scalar param(Index flat) const { return logits_(flat / shape_.vocab_size, flat % shape_.vocab_size); }

 private:
  PolicyShape shape_;
  Matrix logits_;  // rows x vocab_size
};

}  // namespace metacog
