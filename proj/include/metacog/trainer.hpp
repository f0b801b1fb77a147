// SPDX-License-Identifier: Apache-2.0
#pragma once

// The GRPO+CDKC objective on toy policies: group-normalized advantages, the
// clipped policy-gradient surrogate, an exact KL penalty against a reference
// policy, and the signed entropy calibration term. Every loss comes with an
// analytic gradient over the flattened logit table.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metacog/env.hpp"
#include "metacog/policy.hpp"
#include "metacog/rng.hpp"
#include "metacog/signals.hpp"
#include "metacog/types.hpp"

namespace metacog {

struct Trajectory {
  std::vector<int> tokens;
  Vector chosen_logprobs;      // under pi_theta at sampling time
  Vector chosen_logprobs_old;  // under the frozen pi_old snapshot
  Scalar reward = 0.0;
  EntropyValue entropy;        // exact, over the realized prefix rows
};

struct TrajectoryGroup {
  std::string context_id;
  std::vector<Trajectory> trajectories;  // size G >= 2

  Vector rewards() const;
  int size() const { return static_cast<int>(trajectories.size()); }
};

struct TrainConfig {
  int group_size = 8;
  Scalar clip_epsilon = 0.2;      // in (0, 1)
  Scalar lambda1 = 0.001;         // KL penalty weight
  Scalar lambda2 = 0.001;         // calibration weight
  Scalar learning_rate = 0.1;
  int steps = 100;
  Scalar advantage_delta = 1e-8;  // > 0, stabilizer on the reward std
  std::uint64_t rng_seed = 1;
};

void validate(const TrainConfig& config);

struct LossGrad {
  Scalar value = 0.0;
  Vector gradient;
};

/// Calibration loss with its gradient split by path correctness; the total
/// gradient is the sum of the two parts.
struct CalibrationGrad {
  Scalar value = 0.0;
  Vector gradient;
  Vector gradient_correct;    // alpha = +1 paths
  Vector gradient_incorrect;  // alpha = -1 paths
};

/// G ancestral samples of length T. Chosen logprobs are recorded under both
/// the live policy and the old snapshot; per-path entropy is exact.
TrajectoryGroup sample_group(const ToyPolicy& policy, const ToyPolicy& policy_old,
                             const RefusalTrapEnv& env, int group_size, Rng& rng);

/// Convenience overload: the snapshot is the live policy itself (one
/// snapshot per batch, one update per batch).
TrajectoryGroup sample_group(const ToyPolicy& policy, const RefusalTrapEnv& env,
                             int group_size, Rng& rng);

/// A_k = (r_k - mean) / (population std + delta). Homogeneous rewards give
/// exactly zero advantages.
Vector group_advantages(const Vector& rewards, Scalar delta);

/// Clipped surrogate -1/G sum_k min(r_k A_k, clip(r_k) A_k) with r_k the
/// sequence-level importance weight against the stored snapshot. Gradient
/// flows through the unclipped branch wherever the min selects it and is
/// zero where the clipped branch binds.
LossGrad pg_loss(const ToyPolicy& policy, const TrajectoryGroup& group,
                 const Vector& advantages, Scalar epsilon);

/// Exact per-step KL(pi_theta || pi_ref) averaged over the visited prefix
/// rows (with multiplicity). Throws InvalidInput on shape mismatch.
LossGrad kl_penalty(const ToyPolicy& policy, const ToyPolicy& reference,
                    std::span<const Index> visited_rows);

/// Visited rows of every trajectory in the group, in sampling order.
std::vector<Index> visited_rows(const ToyPolicy& policy, const TrajectoryGroup& group);

/// L_cal = 1/G sum_k alpha_k H_k with alpha = +1 on correct paths and -1 on
/// incorrect ones; H_k is the mean full-vocabulary entropy along path k.
/// The gradient is path-constrained: it flows through the per-step
/// distributions at realized prefixes only.
CalibrationGrad calibration_loss(const ToyPolicy& policy, const TrajectoryGroup& group,
                                 const std::vector<bool>& correct);

/// Mean path entropy of the group's realized paths under `policy`.
Scalar mean_path_entropy(const ToyPolicy& policy, const TrajectoryGroup& group);

/// Diagnostics of one optimization step. Loss values are taken at the
/// pre-update policy (the point that was differentiated); probabilities and
/// entropy statistics are exact under the updated policy.
struct StepReport {
  Scalar loss_pg = 0.0;
  Scalar loss_kl = 0.0;
  Scalar loss_cal = 0.0;
  Scalar loss_total = 0.0;
  Scalar p_gold = 0.0;
  Scalar p_refusal = 0.0;
  std::optional<Scalar> mean_entropy_correct;
  std::optional<Scalar> mean_entropy_incorrect;
  Scalar escape_lhs = 0.0;   // lambda2 * ||grad of the correct-path calibration term||
  Scalar escape_rhs = 0.0;   // lambda1 * ||grad KL||
  Scalar flatten_lhs = 0.0;  // lambda2 * ||grad of the incorrect-path calibration term||
  Scalar flatten_rhs = 0.0;  // ||grad pg + lambda1 * grad KL||
};

/// One plain gradient-descent update on L_pg + lambda1 L_KL + lambda2 L_cal.
/// Throws NumericalError (with the offending component) on non-finite
/// gradients.
StepReport total_step(ToyPolicy& policy, const TrajectoryGroup& group,
                      const RefusalTrapEnv& env, const TrainConfig& config);

}  // namespace metacog
