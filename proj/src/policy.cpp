// SPDX-License-Identifier: Apache-2.0
#include "metacog/policy.hpp"

#include "metacog/dist.hpp"
#include "metacog/errors.hpp"

namespace metacog {

namespace {

Index table_rows(const PolicyShape& shape) {
  if (shape.vocab_size < 2) throw InvalidInput("ToyPolicy: vocab_size must be >= 2");
  if (shape.horizon < 1) throw InvalidInput("ToyPolicy: horizon must be >= 1");
  if (shape.memory != 0 && shape.memory != 1)
    throw InvalidInput("ToyPolicy: memory must be 0 or 1");
  if (shape.memory == 0) return shape.horizon;
  return 1 + static_cast<Index>(shape.horizon - 1) * shape.vocab_size;
}

}  // namespace

ToyPolicy::ToyPolicy(PolicyShape shape)
    : shape_(shape), logits_(Matrix::Zero(table_rows(shape), shape.vocab_size)) {}

ToyPolicy ToyPolicy::random(PolicyShape shape, Scalar stddev, Rng& rng) {
  ToyPolicy policy(shape);
  for (Index r = 0; r < policy.logits_.rows(); ++r)
    for (Index v = 0; v < policy.logits_.cols(); ++v)
      policy.logits_(r, v) = stddev * normal01(rng);
  return policy;
}

Index ToyPolicy::row_index(int t, int prev) const {
  if (t < 0 || t >= shape_.horizon) throw InvalidInput("ToyPolicy: position out of range");
  if (shape_.memory == 0 || t == 0) return shape_.memory == 0 ? t : 0;
  if (prev < 0 || prev >= shape_.vocab_size) throw InvalidInput("ToyPolicy: bad previous token");
  return 1 + static_cast<Index>(t - 1) * shape_.vocab_size + prev;
}

std::vector<Index> ToyPolicy::path_rows(std::span<const int> tokens) const {
  if (static_cast<int>(tokens.size()) != shape_.horizon)
    throw InvalidInput("ToyPolicy: path length differs from horizon");
  std::vector<Index> rows(tokens.size());
  for (int t = 0; t < shape_.horizon; ++t)
    rows[t] = row_index(t, t > 0 ? tokens[t - 1] : -1);
  return rows;
}

Vector ToyPolicy::probabilities(Index row) const {
  return softmax(logits_.row(row).transpose());
}

Vector ToyPolicy::log_probabilities(Index row) const {
  return log_softmax(logits_.row(row).transpose());
}

Scalar ToyPolicy::path_log_prob(std::span<const int> tokens) const {
  Scalar total = 0.0;
  const std::vector<Index> rows = path_rows(tokens);
  for (std::size_t t = 0; t < rows.size(); ++t)
    total += log_probabilities(rows[t])[tokens[t]];
  return total;
}

void ToyPolicy::apply_update(const Vector& gradient, Scalar learning_rate) {
  if (gradient.size() != parameter_count())
    throw InvalidInput("ToyPolicy: gradient size mismatch");
  for (Index i = 0; i < gradient.size(); ++i) param(i) -= learning_rate * gradient[i];
}

}  // namespace metacog
