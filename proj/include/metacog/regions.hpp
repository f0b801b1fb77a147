// SPDX-License-Identifier: Apache-2.0
#pragma once

// Per-query behavior profiles, the deterministic region-assignment rule
// (Mastered / Confused / Missing), and the region-specific augmentation
// manifests consumed by downstream retrieval tooling.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metacog/signals.hpp"
#include "metacog/types.hpp"

namespace metacog {

enum class KnowledgeRegion { Mastered, Confused, Missing };

enum class AugmentationStrategy {
  EpistemicFoundation,      // Missing: instantiate absent facts
  StructuralDisambiguation, // Confused: anchor fragmented knowledge
  BoundaryExpansion,        // Mastered: extend stable knowledge
};

const char* to_string(KnowledgeRegion region);
const char* to_string(AugmentationStrategy strategy);

/// Accuracy cutoffs for the assignment rule. The optional tolerance band
/// widens both cuts only for profiles whose correct answers are consistent.
struct RegionThresholds {
  Scalar mastered_floor = 0.80;
  Scalar missing_ceiling = 0.20;
  Scalar tolerance = 0.0;  // 0 disables the band; must stay < (floor-ceiling)/2
};

void validate(const RegionThresholds& thresholds);

struct ProfileSample {
  std::optional<std::string> answer_text;
  Scalar uncertainty = 0.0;
  bool correct = false;
};

struct BehaviorProfile {
  std::string query_id;
  std::optional<std::string> gold_answer;
  std::vector<ProfileSample> samples;  // ordered by sample_id
  Scalar mean_accuracy = 0.0;
  Scalar mean_uncertainty = 0.0;
};

struct AugmentationManifest {
  std::string query_id;
  KnowledgeRegion region = KnowledgeRegion::Confused;
  AugmentationStrategy strategy = AugmentationStrategy::StructuralDisambiguation;
  std::vector<std::string> cognitive_tags;
  std::string search_query_template;  // contains the {tags} placeholder
  std::string search_query;           // template with tags substituted
};

enum class GradeMode { Equality, Containment };

/// Aggregate one query's samples into a profile; samples are reordered by
/// sample_id. Throws InvalidInput on empty input or mixed query_ids.
BehaviorProfile build_profile(std::span<const ResponseSample> samples,
                              std::optional<std::string> gold = std::nullopt);

/// Threshold rule over mean accuracy. With tolerance > 0 the Mastered cut
/// lowers and the Missing cut raises by the tolerance, but only when all
/// correct samples share one normalized answer string. An optional
/// uncertainty ceiling demotes Mastered to Confused when the profile's mean
/// uncertainty exceeds it.
KnowledgeRegion assign_region(const BehaviorProfile& profile,
                              const RegionThresholds& thresholds,
                              std::optional<Scalar> mastered_uncertainty_ceiling = std::nullopt);

/// Lowercase, strip punctuation, collapse whitespace, drop leading articles.
std::string normalize_answer(std::string_view text);

/// Normalized exact match (default) or gold-in-candidate containment.
/// Throws InvalidInput when either string is empty after trimming.
bool grade_answer(std::string_view candidate, std::string_view gold,
                  GradeMode mode = GradeMode::Equality);

/// Fixed region -> strategy mapping.
AugmentationStrategy strategy_for(KnowledgeRegion region);

/// Build the manifest for an assigned region. The default template carries
/// the raw query id plus a {tags} placeholder; tags are substituted when
/// non-empty, otherwise the placeholder is dropped.
AugmentationManifest emit_manifest(const BehaviorProfile& profile, KnowledgeRegion region,
                                   std::vector<std::string> tags);

}  // namespace metacog
