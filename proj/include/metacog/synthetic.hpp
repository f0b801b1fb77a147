// SPDX-License-Identifier: Apache-2.0
#pragma once

// Planted-truth corpus generators backing the closure tests: a decay-law
// corpus, calibrated/miscalibrated confidence pairs, and a region-mix corpus
// with engineered accuracies.

#include <cstdint>
#include <vector>

#include "metacog/signals.hpp"
#include "metacog/types.hpp"

namespace metacog {

struct DecayCorpusSpec {
  Scalar a = 0.8;
  Scalar b = 0.1;
  int n_queries = 10000;
  int k = 16;               // samples per query
  Scalar u_min = 0.05;      // planted per-query uncertainty range
  Scalar u_max = 3.0;
  Scalar u_jitter = 0.05;   // within-query spread of sample uncertainty
  std::uint64_t seed = 1;
};

/// Per-sample correctness is Bernoulli(a*exp(-U) + b) at the sample's own
/// realized uncertainty, so the planted law holds pointwise by construction.
std::vector<ResponseSample> gen_decay_corpus(const DecayCorpusSpec& spec);

struct CalibratedPairsSpec {
  int n = 10000;
  int levels = 100;      // distinct confidence levels, each with n/levels pairs
  Scalar c_min = 0.05;
  Scalar c_max = 0.995;
  Scalar gap = 0.0;      // planted overconfidence: accuracy = confidence - gap
  std::uint64_t seed = 1;
};

/// One single-sample query per pair. Correct counts per level are planted
/// exactly (round(level_accuracy * level_size)), so the corpus is calibrated
/// by construction rather than only in expectation.
std::vector<ResponseSample> gen_calibrated_corpus(const CalibratedPairsSpec& spec);

struct RegionBlock {
  int count = 1;            // queries in this block
  Scalar accuracy = 0.5;    // engineered mean accuracy (multiples of 1/k)
  Scalar uncertainty = 1.0; // center of the block's uncertainty band
};

struct RegionMixSpec {
  int k = 16;
  Scalar u_jitter = 0.02;
  std::vector<RegionBlock> blocks = {
      {1, 1.0, 0.05}, {1, 0.5, 0.8}, {1, 0.0, 2.5}};
  std::uint64_t seed = 1;
};

/// Exactly round(accuracy * k) correct samples per query. Correct samples
/// share one answer string; incorrect ones get distinct answers.
std::vector<ResponseSample> gen_region_mix_corpus(const RegionMixSpec& spec);

}  // namespace metacog
