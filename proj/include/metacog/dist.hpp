// SPDX-License-Identifier: Apache-2.0
#pragma once

// Small distribution kernels shared by the signal primitives and the toy
// policies. All take Eigen expressions and return concrete vectors/scalars;
// logs are natural (nats) throughout.

#include <cmath>

#include "metacog/types.hpp"

namespace metacog {

// Probabilities below this are clamped before ln so 0*ln(0) stays 0 without
// producing non-finite intermediates.
inline constexpr Scalar kLogFloor = 1e-300;

template <typename Derived>
Vector softmax(const Eigen::MatrixBase<Derived>& logits) {
  const Scalar shift = logits.maxCoeff();
  Vector p = (logits.array() - shift).exp().matrix();
  p /= p.sum();
  return p;
}

template <typename Derived>
Vector log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  const Scalar shift = logits.maxCoeff();
  const Scalar log_z = std::log((logits.array() - shift).exp().sum());
  return (logits.array() - shift - log_z).matrix();
}

/// Shannon entropy of a probability vector, in nats.
template <typename Derived>
Scalar entropy(const Eigen::MatrixBase<Derived>& probs) {
  Scalar h = 0.0;
  for (Index v = 0; v < probs.size(); ++v) {
    const Scalar p = probs[v];
    if (p > kLogFloor) h -= p * std::log(p);
  }
  return h < 0.0 ? 0.0 : h;
}

/// KL(p || q) over two probability vectors of equal length, in nats.
template <typename DerivedP, typename DerivedQ>
Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& p,
                     const Eigen::MatrixBase<DerivedQ>& q) {
  Scalar kl = 0.0;
  for (Index v = 0; v < p.size(); ++v) {
    const Scalar pv = p[v];
    if (pv > kLogFloor) {
      const Scalar qv = q[v] > kLogFloor ? q[v] : kLogFloor;
      kl += pv * (std::log(pv) - std::log(qv));
    }
  }
  return kl < 0.0 ? 0.0 : kl;
}

}  // namespace metacog
