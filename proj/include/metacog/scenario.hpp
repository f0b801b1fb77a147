// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seeded end-to-end training runs on the refusal-trap environment, tracing
// the quantities the escape-velocity and manifold-flattening analyses
// compare, plus a verdict derived from threshold crossings.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metacog/env.hpp"
#include "metacog/trainer.hpp"
#include "metacog/types.hpp"

namespace metacog {

enum class ScenarioVariant { Grpo, Cdkc };  // Grpo forces lambda2 = 0
enum class Verdict { Trapped, Escaped, Flattened, Inconclusive };

const char* to_string(ScenarioVariant variant);
const char* to_string(Verdict verdict);
std::optional<ScenarioVariant> variant_from_string(std::string_view name);

struct ScenarioConfig {
  std::string name = "custom";
  PolicyShape shape;
  TrainConfig train;
  EnvSpec env;

  // Verdict thresholds, all pinned here rather than post-hoc.
  Scalar gold_rarity_factor = 10.0;       // precondition: p_gold(0) < factor / V^T
  Scalar gold_escape_threshold = 0.5;     // escaped once p_gold crosses this
  Scalar trap_gold_factor = 2.0;          // trapped while p_gold stays under factor * initial
  Scalar refusal_ceiling = 0.5;           // flattening must keep p_refusal under this
  Scalar flatten_entropy_fraction = 0.9;  // of ln(vocab) at visited states
};

struct ScenarioStep {
  int step = 0;  // 1-based; values describe the state after this update
  Scalar loss_pg = 0.0;
  Scalar loss_kl = 0.0;
  Scalar loss_cal = 0.0;
  Scalar p_gold = 0.0;
  Scalar p_refusal = 0.0;
  Scalar mean_entropy_correct = 0.0;    // NaN when the group had no correct path
  Scalar mean_entropy_incorrect = 0.0;  // NaN when the group had no incorrect path
  Scalar escape_lhs = 0.0;
  Scalar escape_rhs = 0.0;
  Scalar flatten_lhs = 0.0;
  Scalar flatten_rhs = 0.0;
};

struct ScenarioTrace {
  std::string scenario_name;
  ScenarioVariant variant = ScenarioVariant::Grpo;
  Scalar initial_p_gold = 0.0;  // NaN on unsolvable environments
  Scalar initial_p_refusal = 0.0;
  std::vector<ScenarioStep> steps;
  Verdict verdict = Verdict::Inconclusive;
};

/// Run `config.train.steps` updates from the given initial policy.
ScenarioTrace run_scenario(const RefusalTrapEnv& env, ToyPolicy policy,
                           const ScenarioConfig& config, ScenarioVariant variant);

/// Convenience: build environment and initial policy from the config.
ScenarioTrace run_scenario(const ScenarioConfig& config, ScenarioVariant variant);

/// Bundled scenario configurations: "trap-grpo", "trap-cdkc", "flatten-cdkc".
ScenarioConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// Variant a preset is meant to run under (grpo for trap-grpo, cdkc otherwise).
ScenarioVariant preset_variant(std::string_view name);

}  // namespace metacog
