// SPDX-License-Identifier: Apache-2.0
#include "metacog/env.hpp"

#include <cmath>

#include "metacog/errors.hpp"

namespace metacog {

Scalar reward_for(const RefusalTrapEnv& env, std::span<const int> tokens) {
  if (!env.solvable()) return 0.0;
  if (tokens.size() != env.gold.size()) return 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t)
    if (tokens[t] != env.gold[t]) return 0.0;
  return 1.0;
}

std::pair<RefusalTrapEnv, ToyPolicy> make_refusal_env(const PolicyShape& shape,
                                                      const EnvSpec& spec) {
  if (spec.refusal_token < 0 || spec.refusal_token >= shape.vocab_size)
    throw InvalidInput("make_refusal_env: refusal_token out of range");
  if (spec.gold_token < 0 || spec.gold_token >= shape.vocab_size)
    throw InvalidInput("make_refusal_env: gold_token out of range");
  if (spec.solvable && spec.gold_token == spec.refusal_token)
    throw InvalidInput("make_refusal_env: gold and refusal paths must differ");
  if (!(spec.p_ref_refusal > 0.0 && spec.p_ref_refusal < 1.0))
    throw InvalidInput("make_refusal_env: p_ref_refusal must lie in (0, 1)");

  RefusalTrapEnv env{.name = "refusal-trap", .gold = {}, .refusal = {}, .reference = ToyPolicy(shape)};
  env.refusal.assign(shape.horizon, spec.refusal_token);
  if (spec.solvable) env.gold.assign(shape.horizon, spec.gold_token);

  // Logit putting mass p on the refusal token against V-1 zero logits.
  const Scalar z = std::log(spec.p_ref_refusal * (shape.vocab_size - 1) /
                            (1.0 - spec.p_ref_refusal));
  Matrix& ref_logits = env.reference.logits();
  ref_logits.col(spec.refusal_token).setConstant(z);

  ToyPolicy initial(shape);
  initial.logits() = spec.policy_init_blend * ref_logits;
  return {std::move(env), std::move(initial)};
}

}  // namespace metacog
