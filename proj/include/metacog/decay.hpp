// SPDX-License-Identifier: Apache-2.0
#pragma once

// Fit and evaluate the empirical decay of mean accuracy against sequence
// uncertainty, E[Acc | U] ~ a*exp(-U) + b, from per-query aggregates.

#include <span>
#include <string>
#include <vector>

#include "metacog/signals.hpp"
#include "metacog/types.hpp"

namespace metacog {

/// Per-query mean uncertainty / mean accuracy over K sampled generations.
struct QueryAggregate {
  std::string query_id;
  Scalar mean_uncertainty = 0.0;  // >= 0
  Scalar mean_accuracy = 0.0;     // in [0, 1]
  int k = 1;                      // sample count
};

/// Mean coordinate of the aggregates that landed in one equal-width bin.
struct BinCentroid {
  int bin_index = 0;  // in [0, m)
  Scalar phi = 0.0;   // mean uncertainty within the bin
  Scalar psi = 0.0;   // mean accuracy within the bin
  long count = 1;
};

struct DecayFitConfig {
  int max_iterations = 200;
  Scalar gradient_tolerance = 1e-10;  // on the 2-norm of the objective gradient
  bool count_weighted = true;         // weight residuals by centroid count
};

struct DecayFit {
  Scalar a = 0.0;
  Scalar b = 0.0;
  std::vector<BinCentroid> centroids;
  Scalar rmse = 0.0;
  Scalar r_squared = 1.0;
  int iterations = 0;
  bool converged = false;
};

/// Collapse samples into one aggregate per query_id, preserving first-seen
/// query order. Throws InvalidInput on empty input.
std::vector<QueryAggregate> aggregate_queries(std::span<const ResponseSample> samples);

/// Split [min U, max U] into m equal-width half-open bins (last closed),
/// dropping empty bins. Throws DegenerateRange when all aggregates share one
/// uncertainty value.
std::vector<BinCentroid> bin_equidistant(std::span<const QueryAggregate> aggregates, int m);

/// Levenberg-Marquardt least squares of psi ~ a*exp(-phi) + b over centroids,
/// weighted by count unless configured otherwise. Needs >= 3 centroids with
/// distinct phi (InsufficientData otherwise). Divergence is reported via
/// converged=false, not an error.
DecayFit fit_decay(std::vector<BinCentroid> centroids, const DecayFitConfig& config = {});

/// Evaluate the fitted curve at uncertainty u (unclamped).
Scalar predict_decay(const DecayFit& fit, Scalar u);

}  // namespace metacog
