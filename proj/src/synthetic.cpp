// SPDX-License-Identifier: Apache-2.0
#include "metacog/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "metacog/errors.hpp"
#include "metacog/rng.hpp"

namespace metacog {

namespace {

// Token logprobs with an exact mean of -u: draw positive shares and scale.
std::vector<Scalar> logprobs_with_mean(Rng& rng, Scalar u, int tokens) {
  std::vector<Scalar> shares(static_cast<std::size_t>(tokens));
  Scalar total = 0.0;
  for (Scalar& s : shares) {
    s = -std::log(1.0 - uniform01(rng));  // Exp(1)
    total += s;
  }
  std::vector<Scalar> out(shares.size());
  for (std::size_t t = 0; t < shares.size(); ++t)
    out[t] = total > 0.0 ? -u * shares[t] * tokens / total : -u;
  return out;
}

}  // namespace

std::vector<ResponseSample> gen_decay_corpus(const DecayCorpusSpec& spec) {
  if (spec.n_queries < 1 || spec.k < 1) throw InvalidInput("decay corpus: n and k must be >= 1");
  if (!(spec.u_min >= 0.0 && spec.u_max > spec.u_min))
    throw InvalidInput("decay corpus: need 0 <= u_min < u_max");

  Rng rng(spec.seed);
  std::vector<ResponseSample> corpus;
  corpus.reserve(static_cast<std::size_t>(spec.n_queries) * spec.k);

  for (int q = 0; q < spec.n_queries; ++q) {
    const Scalar u_query = spec.u_min + (spec.u_max - spec.u_min) * uniform01(rng);
    for (int k = 0; k < spec.k; ++k) {
      const Scalar u = std::max(0.0, u_query + spec.u_jitter * normal01(rng));
      const int tokens = uniform_int(rng, 4, 12);

      ResponseSample sample;
      sample.query_id = "q" + std::to_string(q);
      sample.sample_id = k;
      sample.token_logprobs = logprobs_with_mean(rng, u, tokens);
      const Scalar p = std::clamp(spec.a * std::exp(-u) + spec.b, 0.0, 1.0);
      sample.correct = uniform01(rng) < p;
      corpus.push_back(std::move(sample));
    }
  }
  return corpus;
}

std::vector<ResponseSample> gen_calibrated_corpus(const CalibratedPairsSpec& spec) {
  if (spec.n < 1) throw InvalidInput("calibrated corpus: n must be >= 1");
  if (spec.levels < 1) throw InvalidInput("calibrated corpus: levels must be >= 1");
  if (!(spec.c_min > 0.0 && spec.c_max <= 1.0 && spec.c_min < spec.c_max))
    throw InvalidInput("calibrated corpus: confidence range must lie in (0, 1]");

  Rng rng(spec.seed);
  const int levels = std::min(spec.levels, spec.n);
  std::vector<ResponseSample> corpus;
  corpus.reserve(static_cast<std::size_t>(spec.n));

  int emitted = 0;
  for (int level = 0; level < levels; ++level) {
    const int remaining_levels = levels - level;
    const int size = (spec.n - emitted) / remaining_levels;
    const Scalar frac = levels == 1 ? 0.5 : static_cast<Scalar>(level) / (levels - 1);
    const Scalar confidence = spec.c_min + (spec.c_max - spec.c_min) * frac;
    const Scalar accuracy = std::clamp(confidence - spec.gap, 0.0, 1.0);
    const auto n_correct = static_cast<int>(std::lround(accuracy * size));

    // Exact correct count per level, order decorrelated within the level.
    std::vector<bool> flags(static_cast<std::size_t>(size));
    for (int i = 0; i < n_correct; ++i) flags[static_cast<std::size_t>(i)] = true;
    for (int i = size - 1; i > 0; --i) {
      const int j = uniform_int(rng, 0, i);
      std::swap(flags[static_cast<std::size_t>(i)], flags[static_cast<std::size_t>(j)]);
    }

    for (int i = 0; i < size; ++i, ++emitted) {
      ResponseSample sample;
      sample.query_id = "pair" + std::to_string(emitted);
      sample.sample_id = 0;
      sample.token_logprobs = logprobs_with_mean(rng, -std::log(confidence), uniform_int(rng, 4, 12));
      sample.correct = flags[static_cast<std::size_t>(i)];
      corpus.push_back(std::move(sample));
    }
  }
  return corpus;
}

std::vector<ResponseSample> gen_region_mix_corpus(const RegionMixSpec& spec) {
  if (spec.k < 1) throw InvalidInput("region mix: k must be >= 1");
  if (spec.blocks.empty()) throw InvalidInput("region mix: no blocks");

  Rng rng(spec.seed);
  std::vector<ResponseSample> corpus;
  int query_index = 0;
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    const RegionBlock& block = spec.blocks[b];
    if (block.count < 1) throw InvalidInput("region mix: block count must be >= 1");
    if (block.accuracy < 0.0 || block.accuracy > 1.0)
      throw InvalidInput("region mix: block accuracy must lie in [0, 1]");
    const auto n_correct = static_cast<int>(std::lround(block.accuracy * spec.k));

    for (int q = 0; q < block.count; ++q, ++query_index) {
      const std::string query_id = "q" + std::to_string(query_index);
      for (int k = 0; k < spec.k; ++k) {
        ResponseSample sample;
        sample.query_id = query_id;
        sample.sample_id = k;
        const Scalar u = std::max(0.0, block.uncertainty + spec.u_jitter * normal01(rng));
        sample.token_logprobs = logprobs_with_mean(rng, u, uniform_int(rng, 4, 12));
        sample.correct = k < n_correct;
        sample.answer_text = sample.correct ? "gold-" + std::to_string(b)
                                            : "alt-" + std::to_string(k);
        corpus.push_back(std::move(sample));
      }
    }
  }
  return corpus;
}

}  // namespace metacog
