// SPDX-License-Identifier: Apache-2.0
#pragma once

// The refusal-trap environment: a sparse exact-match reward, one designated
// gold path, one designated refusal path, and a reference policy biased
// toward the refusal path.

#include <span>
#include <string>
#include <vector>

#include "metacog/policy.hpp"
#include "metacog/types.hpp"

namespace metacog {

struct RefusalTrapEnv {
  std::string name = "refusal-trap";
  std::vector<int> gold;     // empty = unsolvable (reward is always 0)
  std::vector<int> refusal;  // the defensive mode tracked by diagnostics
  ToyPolicy reference;       // pi_ref

  bool solvable() const { return !gold.empty(); }
};

/// Exact-match reward: 1 on the gold path, else 0.
Scalar reward_for(const RefusalTrapEnv& env, std::span<const int> tokens);

/// Declarative environment description used by scenario configs.
struct EnvSpec {
  Scalar p_ref_refusal = 0.9;     // per-step reference mass on the refusal token
  int refusal_token = 0;
  int gold_token = 1;
  bool solvable = true;
  Scalar policy_init_blend = 0.5; // initial logits = blend * reference logits
};

/// Build the environment plus the blended initial policy for a given shape.
/// Gold and refusal are the constant-token paths of the configured tokens.
std::pair<RefusalTrapEnv, ToyPolicy> make_refusal_env(const PolicyShape& shape,
                                                      const EnvSpec& spec);

}  // namespace metacog
