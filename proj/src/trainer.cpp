// SPDX-License-Identifier: Apache-2.0
#include "metacog/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metacog/dist.hpp"
#include "metacog/errors.hpp"

namespace metacog {

Vector TrajectoryGroup::rewards() const {
  Vector r(static_cast<Index>(trajectories.size()));
  for (std::size_t k = 0; k < trajectories.size(); ++k) r[static_cast<Index>(k)] = trajectories[k].reward;
  return r;
}

void validate(const TrainConfig& config) {
  if (config.group_size < 2) throw InvalidInput("train config: group_size must be >= 2");
  if (!(config.clip_epsilon > 0.0 && config.clip_epsilon < 1.0))
    throw InvalidInput("train config: clip_epsilon must lie in (0, 1)");
  if (!(config.advantage_delta > 0.0))
    throw InvalidInput("train config: advantage_delta must be > 0");
  if (config.lambda1 < 0.0 || config.lambda2 < 0.0)
    throw InvalidInput("train config: lambda coefficients must be >= 0");
  if (!(config.learning_rate > 0.0))
    throw InvalidInput("train config: learning_rate must be > 0");
  if (config.steps < 0) throw InvalidInput("train config: steps must be >= 0");
}

TrajectoryGroup sample_group(const ToyPolicy& policy, const ToyPolicy& policy_old,
                             const RefusalTrapEnv& env, int group_size, Rng& rng) {
  if (group_size < 2) throw InvalidInput("sample_group: group size must be >= 2");
  if (policy.rows() != policy_old.rows() || policy.vocab_size() != policy_old.vocab_size())
    throw InvalidInput("sample_group: policy and snapshot shapes differ");

  const int horizon = policy.horizon();
  const int vocab = policy.vocab_size();

  TrajectoryGroup group;
  group.context_id = env.name;
  group.trajectories.reserve(static_cast<std::size_t>(group_size));
  for (int k = 0; k < group_size; ++k) {
    Trajectory traj;
    traj.tokens.resize(static_cast<std::size_t>(horizon));
    traj.chosen_logprobs.resize(horizon);
    traj.chosen_logprobs_old.resize(horizon);
    Matrix step_distributions(horizon, vocab);

    int prev = -1;
    for (int t = 0; t < horizon; ++t) {
      const Index row = policy.row_index(t, prev);
      const Vector probs = policy.probabilities(row);
      const int v = static_cast<int>(sample_categorical(rng, probs));
      traj.tokens[static_cast<std::size_t>(t)] = v;
      traj.chosen_logprobs[t] = policy.log_probabilities(row)[v];
      traj.chosen_logprobs_old[t] = policy_old.log_probabilities(row)[v];
      step_distributions.row(t) = probs.transpose();
      prev = v;
    }
    traj.entropy = sequence_entropy(step_distributions);
    traj.reward = reward_for(env, traj.tokens);
    group.trajectories.push_back(std::move(traj));
  }
  return group;
}

TrajectoryGroup sample_group(const ToyPolicy& policy, const RefusalTrapEnv& env,
                             int group_size, Rng& rng) {
  return sample_group(policy, policy, env, group_size, rng);
}

Vector group_advantages(const Vector& rewards, Scalar delta) {
  if (rewards.size() < 2) throw InvalidInput("group_advantages: need G >= 2 rewards");
  if (!(delta > 0.0)) throw InvalidInput("group_advantages: delta must be > 0");
  const Scalar mean = rewards.mean();
  const Vector centered = rewards.array() - mean;
  const Scalar pop_std = std::sqrt(centered.squaredNorm() / rewards.size());
  return centered / (pop_std + delta);
}

LossGrad pg_loss(const ToyPolicy& policy, const TrajectoryGroup& group,
                 const Vector& advantages, Scalar epsilon) {
  const int g = group.size();
  if (g < 2) throw InvalidInput("pg_loss: group too small");
  if (advantages.size() != g) throw InvalidInput("pg_loss: advantage count mismatch");

  const int vocab = policy.vocab_size();
  LossGrad result;
  result.gradient = Vector::Zero(policy.parameter_count());

  for (int k = 0; k < g; ++k) {
    const Trajectory& traj = group.trajectories[static_cast<std::size_t>(k)];
    const std::vector<Index> rows = policy.path_rows(traj.tokens);

    Scalar logp_theta = 0.0;
    for (std::size_t t = 0; t < rows.size(); ++t)
      logp_theta += policy.log_probabilities(rows[t])[traj.tokens[t]];
    const Scalar ratio = std::exp(logp_theta - traj.chosen_logprobs_old.sum());

    const Scalar advantage = advantages[k];
    const Scalar unclipped = ratio * advantage;
    const Scalar clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage;

    if (unclipped <= clipped) {
      result.value -= unclipped / g;
      const Scalar coeff = -(advantage * ratio) / g;
      for (std::size_t t = 0; t < rows.size(); ++t) {
        const Vector probs = policy.probabilities(rows[t]);
        auto segment = result.gradient.segment(rows[t] * vocab, vocab);
        segment -= coeff * probs;
        segment[traj.tokens[t]] += coeff;
      }
    } else {
      // The clipped branch binds: constant in theta, no gradient.
      result.value -= clipped / g;
    }
  }
  return result;
}

std::vector<Index> visited_rows(const ToyPolicy& policy, const TrajectoryGroup& group) {
  std::vector<Index> rows;
  for (const Trajectory& traj : group.trajectories) {
    const std::vector<Index> path = policy.path_rows(traj.tokens);
    rows.insert(rows.end(), path.begin(), path.end());
  }
  return rows;
}

LossGrad kl_penalty(const ToyPolicy& policy, const ToyPolicy& reference,
                    std::span<const Index> visited) {
  if (policy.rows() != reference.rows() || policy.vocab_size() != reference.vocab_size())
    throw InvalidInput("kl_penalty: policy and reference shapes differ");
  if (visited.empty()) throw InvalidInput("kl_penalty: no visited prefixes");

  const int vocab = policy.vocab_size();
  LossGrad result;
  result.gradient = Vector::Zero(policy.parameter_count());

  for (const Index row : visited) {
    const Vector p = policy.probabilities(row);
    const Vector logp = policy.log_probabilities(row);
    const Vector logq = reference.log_probabilities(row);
    const Scalar kl_row = p.dot(logp - logq);
    result.value += kl_row;
    auto segment = result.gradient.segment(row * vocab, vocab);
    segment += (p.array() * ((logp - logq).array() - kl_row)).matrix();
  }
  const auto n = static_cast<Scalar>(visited.size());
  result.value /= n;
  result.gradient /= n;
  return result;
}

CalibrationGrad calibration_loss(const ToyPolicy& policy, const TrajectoryGroup& group,
                                 const std::vector<bool>& correct) {
  const int g = group.size();
  if (g < 2) throw InvalidInput("calibration_loss: group too small");
  if (static_cast<int>(correct.size()) != g)
    throw InvalidInput("calibration_loss: correctness flag count mismatch");

  const int vocab = policy.vocab_size();
  CalibrationGrad result;
  result.gradient_correct = Vector::Zero(policy.parameter_count());
  result.gradient_incorrect = Vector::Zero(policy.parameter_count());

  for (int k = 0; k < g; ++k) {
    const Trajectory& traj = group.trajectories[static_cast<std::size_t>(k)];
    const std::vector<Index> rows = policy.path_rows(traj.tokens);
    const Scalar alpha = correct[static_cast<std::size_t>(k)] ? 1.0 : -1.0;
    const Scalar coeff = alpha / (static_cast<Scalar>(g) * rows.size());
    Vector& target = correct[static_cast<std::size_t>(k)] ? result.gradient_correct
                                                          : result.gradient_incorrect;

    Scalar path_entropy = 0.0;
    for (const Index row : rows) {
      const Vector p = policy.probabilities(row);
      const Vector logp = policy.log_probabilities(row);
      const Scalar h_row = entropy(p);
      path_entropy += h_row;
      auto segment = target.segment(row * vocab, vocab);
      segment += coeff * (-(p.array() * (logp.array() + h_row))).matrix();
    }
    result.value += alpha * (path_entropy / rows.size()) / g;
  }
  result.gradient = result.gradient_correct + result.gradient_incorrect;
  return result;
}

Scalar mean_path_entropy(const ToyPolicy& policy, const TrajectoryGroup& group) {
  Scalar total = 0.0;
  for (const Trajectory& traj : group.trajectories) {
    const std::vector<Index> rows = policy.path_rows(traj.tokens);
    Scalar h = 0.0;
    for (const Index row : rows) h += entropy(policy.probabilities(row));
    total += h / rows.size();
  }
  return total / group.size();
}

StepReport total_step(ToyPolicy& policy, const TrajectoryGroup& group,
                      const RefusalTrapEnv& env, const TrainConfig& config) {
  validate(config);
  const Vector rewards = group.rewards();
  const Vector advantages = group_advantages(rewards, config.advantage_delta);

  std::vector<bool> correct(group.trajectories.size());
  for (std::size_t k = 0; k < correct.size(); ++k)
    correct[k] = group.trajectories[k].reward > 0.0;

  const LossGrad pg = pg_loss(policy, group, advantages, config.clip_epsilon);
  const std::vector<Index> visited = visited_rows(policy, group);
  const LossGrad kl = kl_penalty(policy, env.reference, visited);
  const CalibrationGrad cal = calibration_loss(policy, group, correct);

  const Vector total_gradient =
      pg.gradient + config.lambda1 * kl.gradient + config.lambda2 * cal.gradient;
  if (!total_gradient.array().isFinite().all()) {
    throw NumericalError("total_step: non-finite gradient (pg=" + std::to_string(pg.value) +
                         ", kl=" + std::to_string(kl.value) +
                         ", cal=" + std::to_string(cal.value) + ")");
  }
  policy.apply_update(total_gradient, config.learning_rate);

  StepReport report;
  report.loss_pg = pg.value;
  report.loss_kl = kl.value;
  report.loss_cal = cal.value;
  report.loss_total = pg.value + config.lambda1 * kl.value + config.lambda2 * cal.value;
  report.p_gold = env.solvable() ? std::exp(policy.path_log_prob(env.gold))
                                 : std::numeric_limits<Scalar>::quiet_NaN();
  report.p_refusal = std::exp(policy.path_log_prob(env.refusal));

  Scalar h_correct = 0.0, h_incorrect = 0.0;
  int n_correct = 0, n_incorrect = 0;
  for (std::size_t k = 0; k < correct.size(); ++k) {
    const std::vector<Index> rows = policy.path_rows(group.trajectories[k].tokens);
    Scalar h = 0.0;
    for (const Index row : rows) h += entropy(policy.probabilities(row));
    h /= rows.size();
    if (correct[k]) {
      h_correct += h;
      ++n_correct;
    } else {
      h_incorrect += h;
      ++n_incorrect;
    }
  }
  if (n_correct > 0) report.mean_entropy_correct = h_correct / n_correct;
  if (n_incorrect > 0) report.mean_entropy_incorrect = h_incorrect / n_incorrect;

  report.escape_lhs = config.lambda2 * cal.gradient_correct.norm();
  report.escape_rhs = config.lambda1 * kl.gradient.norm();
  report.flatten_lhs = config.lambda2 * cal.gradient_incorrect.norm();
  report.flatten_rhs = (pg.gradient + config.lambda1 * kl.gradient).norm();
  return report;
}

}  // namespace metacog
