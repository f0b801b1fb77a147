// SPDX-License-Identifier: Apache-2.0
#include "metacog/scenario.hpp"

#include <cmath>
#include <limits>

#include "metacog/errors.hpp"

namespace metacog {

const char* to_string(ScenarioVariant variant) {
  return variant == ScenarioVariant::Grpo ? "grpo" : "cdkc";
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Trapped: return "trapped";
    case Verdict::Escaped: return "escaped";
    case Verdict::Flattened: return "flattened";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::optional<ScenarioVariant> variant_from_string(std::string_view name) {
  if (name == "grpo") return ScenarioVariant::Grpo;
  if (name == "cdkc") return ScenarioVariant::Cdkc;
  return std::nullopt;
}

namespace {

constexpr Scalar kNaN = std::numeric_limits<Scalar>::quiet_NaN();

Verdict decide(const ScenarioTrace& trace, const RefusalTrapEnv& env,
               const ScenarioConfig& config) {
  if (trace.steps.empty()) return Verdict::Inconclusive;
  const ScenarioStep& last = trace.steps.back();

  if (env.solvable()) {
    for (const ScenarioStep& s : trace.steps)
      if (s.p_gold >= config.gold_escape_threshold) return Verdict::Escaped;
    const bool refusal_grew = last.p_refusal > trace.initial_p_refusal;
    const bool gold_stuck = last.p_gold < config.trap_gold_factor * trace.initial_p_gold;
    if (refusal_grew && gold_stuck) return Verdict::Trapped;
    return Verdict::Inconclusive;
  }

  // Unsolvable: every path is incorrect, so the incorrect-side entropy is the
  // visited-state mean.
  const Scalar target = config.flatten_entropy_fraction *
                        std::log(static_cast<Scalar>(env.reference.vocab_size()));
  bool refusal_bounded = true;
  for (const ScenarioStep& s : trace.steps)
    refusal_bounded = refusal_bounded && s.p_refusal <= config.refusal_ceiling;
  if (last.mean_entropy_incorrect >= target && refusal_bounded) return Verdict::Flattened;
  return Verdict::Inconclusive;
}

}  // namespace

ScenarioTrace run_scenario(const RefusalTrapEnv& env, ToyPolicy policy,
                           const ScenarioConfig& config, ScenarioVariant variant) {
  validate(config.train);

  TrainConfig train = config.train;
  if (variant == ScenarioVariant::Grpo) train.lambda2 = 0.0;

  ScenarioTrace trace;
  trace.scenario_name = config.name;
  trace.variant = variant;
  trace.initial_p_refusal = std::exp(policy.path_log_prob(env.refusal));
  if (env.solvable()) {
    trace.initial_p_gold = std::exp(policy.path_log_prob(env.gold));
    const Scalar rarity = config.gold_rarity_factor *
                          std::pow(1.0 / policy.vocab_size(), policy.horizon());
    if (!(trace.initial_p_gold < rarity))
      throw InvalidInput("run_scenario: gold path is not rare enough for a trap scenario");
  } else {
    trace.initial_p_gold = kNaN;
  }

  Rng rng(train.rng_seed);
  for (int step = 1; step <= train.steps; ++step) {
    const TrajectoryGroup group = sample_group(policy, env, train.group_size, rng);
    StepReport report;
    try {
      report = total_step(policy, group, env, train);
    } catch (const NumericalError& err) {
      throw NumericalError(std::string(err.what()) + " at step " + std::to_string(step));
    }

    ScenarioStep s;
    s.step = step;
    s.loss_pg = report.loss_pg;
    s.loss_kl = report.loss_kl;
    s.loss_cal = report.loss_cal;
    s.p_gold = report.p_gold;
    s.p_refusal = report.p_refusal;
    s.mean_entropy_correct = report.mean_entropy_correct.value_or(kNaN);
    s.mean_entropy_incorrect = report.mean_entropy_incorrect.value_or(kNaN);
    s.escape_lhs = report.escape_lhs;
    s.escape_rhs = report.escape_rhs;
    s.flatten_lhs = report.flatten_lhs;
    s.flatten_rhs = report.flatten_rhs;
    trace.steps.push_back(s);
  }

  trace.verdict = decide(trace, env, config);
  return trace;
}

ScenarioTrace run_scenario(const ScenarioConfig& config, ScenarioVariant variant) {
  auto [env, policy] = make_refusal_env(config.shape, config.env);
  env.name = config.name;
  return run_scenario(env, std::move(policy), config, variant);
}

ScenarioConfig preset(std::string_view name) {
  // Shared trap setup: reference policy puts 0.9 per step on the refusal
  // token; the initial policy sits three quarters of the way toward it, so
  // the gold path starts around 4e-5 while the refusal path starts near
  // 0.44. lambda2 = 0.5 is strong enough to flatten the refusal mode yet
  // leaves discovered-gold updates intact; 2.0 would erase them.
  ScenarioConfig config;
  config.shape = PolicyShape{.vocab_size = 8, .horizon = 3, .memory = 0};
  config.env = EnvSpec{.p_ref_refusal = 0.9,
                       .refusal_token = 0,
                       .gold_token = 1,
                       .solvable = true,
                       .policy_init_blend = 0.75};
  config.train.group_size = 8;
  config.train.clip_epsilon = 0.2;
  config.train.lambda1 = 0.01;
  config.train.learning_rate = 0.5;
  config.train.advantage_delta = 1e-8;
  config.train.rng_seed = 1;

  if (name == "trap-grpo") {
    config.name = "trap-grpo";
    config.train.lambda2 = 0.0;
    config.train.steps = 200;
    return config;
  }
  if (name == "trap-cdkc") {
    config.name = "trap-cdkc";
    config.train.lambda2 = 0.5;
    config.train.steps = 2000;
    return config;
  }
  if (name == "flatten-cdkc") {
    config.name = "flatten-cdkc";
    config.train.lambda2 = 0.5;
    config.train.steps = 1000;
    config.env.solvable = false;
    return config;
  }
  throw InvalidInput("unknown scenario preset: " + std::string(name));
}

std::vector<std::string> preset_names() {
  return {"trap-grpo", "trap-cdkc", "flatten-cdkc"};
}

ScenarioVariant preset_variant(std::string_view name) {
  return name == "trap-grpo" ? ScenarioVariant::Grpo : ScenarioVariant::Cdkc;
}

}  // namespace metacog
