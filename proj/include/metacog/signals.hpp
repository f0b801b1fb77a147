// SPDX-License-Identifier: Apache-2.0
#pragma once

// Sequence-level uncertainty, entropy, and confidence primitives. These are
// pure functions over immutable inputs; every other module builds on them.
//
// Units: nats per token. Uncertainty is the average negative log-likelihood
// of the chosen tokens; entropy is the average full-vocabulary Shannon
// entropy; confidence is exp(-uncertainty), so the three stay consistent.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metacog/dist.hpp"
#include "metacog/errors.hpp"
#include "metacog/types.hpp"

namespace metacog {

/// One logged generation for one query.
struct ResponseSample {
  std::string query_id;
  int sample_id = 0;
  std::vector<Scalar> token_logprobs;        // each finite and <= 0
  std::optional<Matrix> step_distributions;  // rows = tokens, cols = vocab
  std::optional<std::string> answer_text;
  bool correct = false;
};

struct UncertaintyValue {
  Scalar value = 0.0;  // >= 0, nats per token
};

struct EntropyValue {
  Scalar value = 0.0;  // in [0, ln(vocab_size)]
  Index vocab_size = 2;
};

namespace detail {

// Renormalize a near-stochastic row exactly. Tolerance matches what survives
// a round-trip through textual logs.
inline constexpr Scalar kNormalizationTolerance = 1e-9;

template <typename Derived>
Vector checked_distribution(const Eigen::MatrixBase<Derived>& row) {
  if (row.size() < 2) throw InvalidInput("probability vector needs length >= 2");
  if ((row.array() < 0.0).any()) throw InvalidInput("negative probability entry");
  const Scalar sum = row.sum();
  if (!std::isfinite(sum) || std::abs(sum - 1.0) > kNormalizationTolerance)
    throw InvalidInput("probability vector does not sum to 1");
  return row / sum;
}

}  // namespace detail

/// Average negative log-likelihood of a token sequence.
template <typename Derived>
UncertaintyValue sequence_uncertainty(const Eigen::DenseBase<Derived>& logprobs) {
  if (logprobs.size() == 0) throw InvalidInput("sequence_uncertainty: empty sequence");
  if (!logprobs.derived().array().isFinite().all())
    throw InvalidInput("sequence_uncertainty: non-finite log-probability");
  if ((logprobs.derived().array() > 0.0).any())
    throw InvalidInput("sequence_uncertainty: positive log-probability");
  const Scalar u = -logprobs.derived().template cast<Scalar>().mean();
  return UncertaintyValue{u < 0.0 ? 0.0 : u};
}

inline UncertaintyValue sequence_uncertainty(std::span<const Scalar> logprobs) {
  return sequence_uncertainty(ConstVectorMap(logprobs.data(), static_cast<Index>(logprobs.size())));
}

/// Per-step Shannon entropy averaged over a generation; one row per token
/// position, all rows over the same vocabulary.
template <typename Derived>
EntropyValue sequence_entropy(const Eigen::MatrixBase<Derived>& distributions) {
  if (distributions.rows() == 0) throw InvalidInput("sequence_entropy: no steps");
  Scalar total = 0.0;
  for (Index t = 0; t < distributions.rows(); ++t)
    total += entropy(detail::checked_distribution(distributions.row(t).transpose()));
  return EntropyValue{total / static_cast<Scalar>(distributions.rows()), distributions.cols()};
}

inline EntropyValue sequence_entropy(const std::vector<Vector>& distributions) {
  if (distributions.empty()) throw InvalidInput("sequence_entropy: no steps");
  const Index vocab = distributions.front().size();
  Scalar total = 0.0;
  for (const Vector& row : distributions) {
    if (row.size() != vocab) throw InvalidInput("sequence_entropy: ragged vocabulary");
    total += entropy(detail::checked_distribution(row));
  }
  return EntropyValue{total / static_cast<Scalar>(distributions.size()), vocab};
}

/// c = exp(-u): maps NLL-per-token into (0, 1].
inline Scalar confidence_from_uncertainty(UncertaintyValue u) {
  if (!(u.value >= 0.0)) throw InvalidInput("confidence_from_uncertainty: negative uncertainty");
  return std::exp(-u.value);
}

/// Validate every ResponseSample invariant; throws InvalidInput with a reason.
inline void validate(const ResponseSample& sample) {
  if (sample.query_id.empty()) throw InvalidInput("query_id is empty");
  if (sample.sample_id < 0) throw InvalidInput("sample_id is negative");
  if (sample.token_logprobs.empty()) throw InvalidInput("token_logprobs is empty");
  for (const Scalar lp : sample.token_logprobs) {
    if (!std::isfinite(lp)) throw InvalidInput("token_logprobs has a non-finite entry");
    if (lp > 0.0) throw InvalidInput("token_logprobs has a positive entry");
  }
  if (sample.step_distributions) {
    const Matrix& d = *sample.step_distributions;
    if (d.rows() != static_cast<Index>(sample.token_logprobs.size()))
      throw InvalidInput("step_distributions length differs from token_logprobs");
    for (Index t = 0; t < d.rows(); ++t)
      (void)detail::checked_distribution(d.row(t).transpose());
  }
}

}  // namespace metacog
