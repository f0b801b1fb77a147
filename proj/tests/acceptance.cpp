// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Expects the CLI binary path as argv[1]; the determinism and
// closure criteria drive the real executable, everything else goes through
// the library.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "metacog/cli.hpp"
#include "metacog/decay.hpp"
#include "metacog/errors.hpp"
#include "metacog/io.hpp"
#include "metacog/metrics.hpp"
#include "metacog/scenario.hpp"
#include "metacog/synthetic.hpp"
#include "metacog/trainer.hpp"

using namespace metacog;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_scratch;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
};

int run_cli(const std::string& args, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const std::string cmd = "\"" + g_cli + "\" " + args + " --output-dir \"" +
                          out_dir.string() + "\" > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// --------------------------------------------------------------------------
// 1. CBS harmonic-mean identity at the reference operating points
// --------------------------------------------------------------------------
Check cbs_identity() {
  Check c;
  const Scalar vanilla = *cbs_from(0.7974, 0.5760);
  c.require(std::abs(vanilla - 0.6688) <= 1e-4,
            "cbs(0.7974, 0.5760) = " + format_double(vanilla));
  const Scalar calibrated = *cbs_from(0.8727, 0.6337);
  c.require(std::abs(calibrated - 0.7343) <= 0.01,
            "cbs(0.8727, 0.6337) = " + format_double(calibrated));

  // The same identity through counts engineered to those exact rates.
  const CognitiveReport report = cognitive_metrics({31896, 23479, 10000, 8104});
  c.require(std::abs(*report.ar - 0.7974) < 1e-12, "ar mismatch");
  c.require(std::abs(*report.kei - 0.5760) < 1e-12, "kei mismatch");
  c.require(std::abs(*report.cbs - 0.6688) <= 1e-4, "cbs from counts");
  return c;
}

// --------------------------------------------------------------------------
// 2. Decay-law closure: plant (0.8, 0.1), N=10k, K=16, refit with M=100
// --------------------------------------------------------------------------
Check decay_closure() {
  Check c;

  // Seed 1 exercises the full executable including the JSONL round trip.
  const fs::path dir = g_scratch / "closure";
  c.require(run_cli("gen-synthetic --law decay --n 10000 --k 16 --seed 1", dir) == 0,
            "gen-synthetic failed");
  c.require(run_cli("fit-decay --input \"" + (dir / "corpus.jsonl").string() +
                        "\" --m 100 --k 16",
                    dir) == 0,
            "fit-decay failed");
  const auto report = nlohmann::json::parse(slurp(dir / "decay_fit.json"));
  c.require(std::abs(report.at("a").get<Scalar>() - 0.8) <= 0.05,
            "cli seed 1: a = " + format_double(report.at("a").get<Scalar>()));
  c.require(std::abs(report.at("b").get<Scalar>() - 0.1) <= 0.02,
            "cli seed 1: b = " + format_double(report.at("b").get<Scalar>()));

  // Remaining seeds run the same pipeline in-process to stay inside the
  // runtime budget.
  for (std::uint64_t seed = 2; seed <= 10; ++seed) {
    DecayCorpusSpec spec;
    spec.seed = seed;
    const auto corpus = gen_decay_corpus(spec);
    const DecayFit fit = fit_decay(bin_equidistant(aggregate_queries(corpus), 100));
    c.require(std::abs(fit.a - 0.8) <= 0.05,
              "seed " + std::to_string(seed) + ": a = " + format_double(fit.a));
    c.require(std::abs(fit.b - 0.1) <= 0.02,
              "seed " + std::to_string(seed) + ": b = " + format_double(fit.b));
  }

  // Noiseless centroids recover the parameters to 1e-6.
  std::vector<BinCentroid> noiseless;
  const std::vector<Scalar> phis = {0.0, 0.4, 0.9, 1.5, 2.2, 3.0};
  for (std::size_t i = 0; i < phis.size(); ++i)
    noiseless.push_back(
        {static_cast<int>(i), phis[i], 0.8 * std::exp(-phis[i]) + 0.1, 10});
  const DecayFit exact = fit_decay(noiseless);
  c.require(std::abs(exact.a - 0.8) < 1e-6, "noiseless a = " + format_double(exact.a));
  c.require(std::abs(exact.b - 0.1) < 1e-6, "noiseless b = " + format_double(exact.b));
  return c;
}

// --------------------------------------------------------------------------
// 3. ECE correctness: calibrated corpus, hand fixture, maximal miscalibration
// --------------------------------------------------------------------------
Check ece_correctness() {
  Check c;
  CalibratedPairsSpec spec;
  spec.n = 10000;
  spec.seed = 1;
  const auto corpus = gen_calibrated_corpus(spec);
  std::vector<ConfidencePair> pairs;
  for (const ResponseSample& s : corpus) {
    const UncertaintyValue u = sequence_uncertainty(std::span<const Scalar>(s.token_logprobs));
    pairs.push_back({confidence_from_uncertainty(u), s.correct});
  }
  const Scalar ece = ece_equal_mass(pairs, 10).ece;
  c.require(ece < 0.01, "calibrated corpus ece = " + format_double(ece));

  const std::vector<ConfidencePair> fixture = {
      {0.9, true}, {0.8, false}, {0.2, false}, {0.1, true}};
  const Scalar hand = ece_equal_mass(fixture, 2).ece;
  c.require(std::abs(hand - 0.35) < 1e-12, "hand fixture ece = " + format_double(hand));

  const std::vector<ConfidencePair> wrong(4, {1.0, false});
  const Scalar maximal = ece_equal_mass(wrong, 1).ece;
  c.require(maximal == 1.0, "all-confident-all-wrong ece = " + format_double(maximal));
  return c;
}

// --------------------------------------------------------------------------
// 4. Gradient oracle: analytic vs central differences on 100 random policies
// --------------------------------------------------------------------------
Check gradient_oracle() {
  Check c;
  const Scalar h = 1e-5;
  const auto fd_gradient = [&](ToyPolicy& policy,
                               const std::function<Scalar(const ToyPolicy&)>& loss) {
    Vector grad(policy.parameter_count());
    for (Index i = 0; i < policy.parameter_count(); ++i) {
      const Scalar original = policy.param(i);
      policy.param(i) = original + h;
      const Scalar up = loss(policy);
      policy.param(i) = original - h;
      const Scalar down = loss(policy);
      policy.param(i) = original;
      grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
  };
  const auto rel_error = [](const Vector& a, const Vector& b) {
    const Scalar scale = std::max({1e-6, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
    return (a - b).cwiseAbs().maxCoeff() / scale;
  };

  Rng rng(2024);
  Scalar worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    PolicyShape shape;
    shape.vocab_size = uniform_int(rng, 2, 8);
    shape.horizon = uniform_int(rng, 1, 4);
    shape.memory = uniform_int(rng, 0, 1);
    EnvSpec env_spec;
    env_spec.p_ref_refusal = 0.3 + 0.5 * uniform01(rng);
    auto [env, initial] = make_refusal_env(shape, env_spec);
    (void)initial;

    ToyPolicy policy = ToyPolicy::random(shape, 1.0, rng);
    const ToyPolicy policy_old = ToyPolicy::random(shape, 1.0, rng);
    const TrajectoryGroup group = sample_group(policy, policy_old, env, 4, rng);
    Vector advantages(group.size());
    for (int k = 0; k < group.size(); ++k) advantages[k] = 2.0 * uniform01(rng) - 1.0;
    std::vector<bool> correct(group.trajectories.size());
    for (std::size_t k = 0; k < correct.size(); ++k) correct[k] = uniform01(rng) < 0.5;
    const std::vector<Index> rows = visited_rows(policy, group);

    const Scalar err_pg = rel_error(
        pg_loss(policy, group, advantages, 0.2).gradient,
        fd_gradient(policy, [&](const ToyPolicy& p) {
          return pg_loss(p, group, advantages, 0.2).value;
        }));
    const Scalar err_kl = rel_error(
        kl_penalty(policy, env.reference, rows).gradient,
        fd_gradient(policy, [&](const ToyPolicy& p) {
          return kl_penalty(p, env.reference, rows).value;
        }));
    const Scalar err_cal = rel_error(
        calibration_loss(policy, group, correct).gradient,
        fd_gradient(policy, [&](const ToyPolicy& p) {
          return calibration_loss(p, group, correct).value;
        }));
    worst = std::max({worst, err_pg, err_kl, err_cal});
    c.require(err_pg < 1e-5, "trial " + std::to_string(trial) + " pg error " + format_double(err_pg));
    c.require(err_kl < 1e-5, "trial " + std::to_string(trial) + " kl error " + format_double(err_kl));
    c.require(err_cal < 1e-5,
              "trial " + std::to_string(trial) + " cal error " + format_double(err_cal));
  }
  c.detail << "worst relative error " << format_double(worst);
  return c;
}

// --------------------------------------------------------------------------
// 5. Advantage algebra: vacuum, zero sum, affine-shift invariance
// --------------------------------------------------------------------------
Check advantage_algebra() {
  Check c;
  Rng rng(31415);

  const Vector homogeneous = group_advantages(Vector::Ones(8), 1e-8);
  c.require(homogeneous.isZero(0.0), "homogeneous rewards gave nonzero advantages");

  // The vacuum propagates: zero advantages produce a zero pg gradient.
  PolicyShape shape{.vocab_size = 6, .horizon = 3, .memory = 1};
  EnvSpec env_spec;
  auto [env, initial] = make_refusal_env(shape, env_spec);
  (void)initial;
  ToyPolicy policy = ToyPolicy::random(shape, 1.0, rng);
  const TrajectoryGroup group = sample_group(policy, env, 8, rng);
  const LossGrad pg = pg_loss(policy, group, Vector::Zero(8), 0.2);
  c.require(pg.value == 0.0, "vacuum loss nonzero");
  c.require(pg.gradient.isZero(0.0), "vacuum gradient nonzero");

  for (int trial = 0; trial < 200; ++trial) {
    const int g = uniform_int(rng, 2, 16);
    Vector rewards(g);
    for (int i = 0; i < g; ++i) rewards[i] = 5.0 * uniform01(rng);
    const Vector a = group_advantages(rewards, 1e-8);
    c.require(std::abs(a.sum()) <= 1e-12, "advantages sum to " + format_double(a.sum()));
    const Scalar shift = 20.0 * uniform01(rng) - 10.0;
    const Vector shifted = group_advantages(rewards.array() + shift, 1e-8);
    c.require((a - shifted).cwiseAbs().maxCoeff() <= 1e-12, "affine shift moved advantages");
  }
  return c;
}

// --------------------------------------------------------------------------
// 6. Calibration sign law: 50 seeded small-step updates
// --------------------------------------------------------------------------
Check calibration_sign_law() {
  Check c;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(seed);
    PolicyShape shape;
    shape.vocab_size = uniform_int(rng, 2, 8);
    shape.horizon = uniform_int(rng, 1, 4);
    shape.memory = uniform_int(rng, 0, 1);
    EnvSpec env_spec;
    auto [env, initial] = make_refusal_env(shape, env_spec);
    (void)initial;
    ToyPolicy policy = ToyPolicy::random(shape, 1.0, rng);
    const TrajectoryGroup group = sample_group(policy, env, 6, rng);
    const Scalar before = mean_path_entropy(policy, group);

    ToyPolicy sharpened = policy;
    sharpened.apply_update(
        calibration_loss(sharpened, group, std::vector<bool>(6, true)).gradient, 1e-3);
    c.require(mean_path_entropy(sharpened, group) < before,
              "seed " + std::to_string(seed) + ": all-correct step did not lower entropy");

    ToyPolicy hesitant = policy;
    hesitant.apply_update(
        calibration_loss(hesitant, group, std::vector<bool>(6, false)).gradient, 1e-3);
    c.require(mean_path_entropy(hesitant, group) > before,
              "seed " + std::to_string(seed) + ": all-incorrect step did not raise entropy");
  }
  return c;
}

// --------------------------------------------------------------------------
// 7. Trap/escape dynamics across 10 seeds per bundled scenario
// --------------------------------------------------------------------------
Check trap_escape_dynamics() {
  Check c;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScenarioConfig trap = preset("trap-grpo");
    trap.train.rng_seed = seed;
    const ScenarioTrace grpo = run_scenario(trap, ScenarioVariant::Grpo);
    c.require(grpo.verdict == Verdict::Trapped,
              "trap-grpo seed " + std::to_string(seed) + " -> " + to_string(grpo.verdict));
    if (!grpo.steps.empty()) {
      c.require(grpo.steps.back().p_refusal > grpo.initial_p_refusal,
                "trap-grpo seed " + std::to_string(seed) + ": refusal did not grow");
      c.require(grpo.steps.back().p_gold < 2.0 * grpo.initial_p_gold,
                "trap-grpo seed " + std::to_string(seed) + ": gold exceeded 2x initial");
    }

    ScenarioConfig escape = preset("trap-cdkc");
    escape.train.rng_seed = seed;
    const ScenarioTrace cdkc = run_scenario(escape, ScenarioVariant::Cdkc);
    c.require(cdkc.verdict == Verdict::Escaped,
              "trap-cdkc seed " + std::to_string(seed) + " -> " + to_string(cdkc.verdict));
    bool crossed = false;
    for (const ScenarioStep& s : cdkc.steps) crossed = crossed || s.p_gold > 0.5;
    c.require(crossed, "trap-cdkc seed " + std::to_string(seed) + ": gold never crossed 0.5");
  }
  return c;
}

// --------------------------------------------------------------------------
// 8. Region partition: engineered accuracies plus full coverage of [0, 1]
// --------------------------------------------------------------------------
Check region_partition() {
  Check c;
  const RegionThresholds defaults;
  const auto profile_at = [](Scalar accuracy) {
    BehaviorProfile p;
    p.query_id = "q";
    p.samples.push_back({std::nullopt, 0.1, false});
    p.mean_accuracy = accuracy;
    p.mean_uncertainty = 0.1;
    return p;
  };

  const std::vector<std::pair<Scalar, KnowledgeRegion>> engineered = {
      {1.0, KnowledgeRegion::Mastered},
      {0.9375, KnowledgeRegion::Mastered},
      {0.5, KnowledgeRegion::Confused},
      {0.0625, KnowledgeRegion::Missing},
      {0.0, KnowledgeRegion::Missing},
  };
  for (const auto& [accuracy, expected] : engineered) {
    const KnowledgeRegion got = assign_region(profile_at(accuracy), defaults);
    c.require(got == expected, "accuracy " + format_double(accuracy) + " -> " + to_string(got));
  }

  Rng rng(64);
  for (int trial = 0; trial < 10000; ++trial) {
    const Scalar accuracy = uniform01(rng);
    const KnowledgeRegion region = assign_region(profile_at(accuracy), defaults);
    const KnowledgeRegion expected = accuracy >= defaults.mastered_floor
                                         ? KnowledgeRegion::Mastered
                                     : accuracy <= defaults.missing_ceiling
                                         ? KnowledgeRegion::Missing
                                         : KnowledgeRegion::Confused;
    c.require(region == expected, "partition broke at accuracy " + format_double(accuracy));
  }
  return c;
}

// --------------------------------------------------------------------------
// 9. Determinism: every subcommand rerun with identical config and seed
// --------------------------------------------------------------------------
Check determinism() {
  Check c;
  const fs::path root = g_scratch / "determinism";

  const auto compare_dirs = [&](const fs::path& a, const fs::path& b,
                                const std::string& label) {
    std::vector<fs::path> names;
    for (const auto& entry : fs::directory_iterator(a)) names.push_back(entry.path().filename());
    c.require(!names.empty(), label + ": no files emitted");
    for (const fs::path& name : names) {
      const bool same = slurp(a / name) == slurp(b / name);
      c.require(same, label + ": " + name.string() + " differs between reruns");
    }
  };

  const auto twice = [&](const std::string& label, const std::string& args) {
    const fs::path a = root / (label + "_a");
    const fs::path b = root / (label + "_b");
    c.require(run_cli(args, a) == 0, label + " (first run) failed");
    c.require(run_cli(args, b) == 0, label + " (second run) failed");
    if (c.ok) compare_dirs(a, b, label);
  };

  twice("gen_decay", "gen-synthetic --law decay --n 400 --k 4 --seed 12");
  twice("gen_calibrated", "gen-synthetic --law calibrated --n 300 --seed 5");
  twice("gen_regions", "gen-synthetic --law region-mix --counts 3,2,2 --seed 9");
  twice("fit", "fit-decay --input \"" + (root / "gen_decay_a" / "corpus.jsonl").string() +
                   "\" --m 20 --k 4");
  twice("regions", "assign-regions --input \"" +
                       (root / "gen_regions_a" / "corpus.jsonl").string() + "\"");
  twice("ece", "ece --input \"" + (root / "gen_calibrated_a" / "corpus.jsonl").string() +
                   "\" --bins 10");
  twice("simulate", "simulate --preset trap-grpo --steps 50 --seed 4");

  // metrics needs a decision log; build one deterministic fixture.
  std::ostringstream decisions;
  for (int i = 0; i < 40; ++i) {
    const bool answerable = i % 2 == 0;
    const bool abstained = i % 3 == 0;
    nlohmann::json j;
    j["query_id"] = "d" + std::to_string(i);
    j["answerable"] = answerable;
    j["abstained"] = abstained;
    if (!abstained) {
      j["correct"] = i % 4 == 0;
      j["uncertainty"] = 0.1 + 0.05 * i;
    }
    decisions << j.dump() << '\n';
  }
  fs::create_directories(root);
  write_text_file(root / "decisions.jsonl", decisions.str());
  twice("metrics",
        "metrics --input \"" + (root / "decisions.jsonl").string() + "\" --bins 2");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-cli>\n";
    return 64;
  }
  g_cli = argv[1];
  g_scratch = fs::temp_directory_path() / "metacog_acceptance";
  fs::remove_all(g_scratch);
  fs::create_directories(g_scratch);

  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"cbs-identity", cbs_identity},
      {"decay-closure", decay_closure},
      {"ece-correctness", ece_correctness},
      {"gradient-oracle", gradient_oracle},
      {"advantage-algebra", advantage_algebra},
      {"calibration-sign-law", calibration_sign_law},
      {"trap-escape-dynamics", trap_escape_dynamics},
      {"region-partition", region_partition},
      {"determinism", determinism},
  };

  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Check result;
    try {
      result = run();
    } catch (const std::exception& err) {
      result.ok = false;
      result.detail << "exception: " << err.what();
    }
    const std::string detail = result.detail.str();
    std::cout << (result.ok ? "[PASS] " : "[FAIL] ") << name
              << (detail.empty() ? "" : " — " + detail) << "\n";
    if (!result.ok) ++failures;
  }
  return failures;
}
