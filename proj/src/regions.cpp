// SPDX-License-Identifier: Apache-2.0
#include "metacog/regions.hpp"

#include <algorithm>
#include <cctype>

#include "metacog/errors.hpp"

namespace metacog {

const char* to_string(KnowledgeRegion region) {
  switch (region) {
    case KnowledgeRegion::Mastered: return "Mastered";
    case KnowledgeRegion::Confused: return "Confused";
    case KnowledgeRegion::Missing: return "Missing";
  }
  return "Confused";
}

const char* to_string(AugmentationStrategy strategy) {
  switch (strategy) {
    case AugmentationStrategy::EpistemicFoundation: return "EpistemicFoundation";
    case AugmentationStrategy::StructuralDisambiguation: return "StructuralDisambiguation";
    case AugmentationStrategy::BoundaryExpansion: return "BoundaryExpansion";
  }
  return "StructuralDisambiguation";
}

void validate(const RegionThresholds& t) {
  if (!(0.0 <= t.missing_ceiling && t.missing_ceiling < t.mastered_floor && t.mastered_floor <= 1.0))
    throw InvalidInput("thresholds must satisfy 0 <= missing_ceiling < mastered_floor <= 1");
  if (t.tolerance < 0.0 || t.tolerance >= (t.mastered_floor - t.missing_ceiling) / 2.0)
    throw InvalidInput("tolerance must lie in [0, (mastered_floor - missing_ceiling)/2)");
}

BehaviorProfile build_profile(std::span<const ResponseSample> samples,
                              std::optional<std::string> gold) {
  if (samples.empty()) throw InvalidInput("build_profile: no samples");

  BehaviorProfile profile;
  profile.query_id = samples.front().query_id;
  profile.gold_answer = std::move(gold);

  std::vector<const ResponseSample*> ordered;
  ordered.reserve(samples.size());
  for (const ResponseSample& s : samples) {
    if (s.query_id != profile.query_id)
      throw InvalidInput("build_profile: mixed query_ids");
    ordered.push_back(&s);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ResponseSample* a, const ResponseSample* b) {
                     return a->sample_id < b->sample_id;
                   });

  for (const ResponseSample* s : ordered) {
    const Scalar u = sequence_uncertainty(std::span<const Scalar>(s->token_logprobs)).value;
    profile.samples.push_back(ProfileSample{s->answer_text, u, s->correct});
    profile.mean_uncertainty += u;
    profile.mean_accuracy += s->correct ? 1.0 : 0.0;
  }
  profile.mean_uncertainty /= static_cast<Scalar>(profile.samples.size());
  profile.mean_accuracy /= static_cast<Scalar>(profile.samples.size());
  return profile;
}

namespace {

// All correct samples carry the same normalized answer (vacuously true when
// none are correct). Unanswered correct samples disqualify the band.
bool correct_answers_consistent(const BehaviorProfile& profile) {
  std::optional<std::string> seen;
  for (const ProfileSample& s : profile.samples) {
    if (!s.correct) continue;
    if (!s.answer_text) return false;
    std::string norm = normalize_answer(*s.answer_text);
    if (!seen) {
      seen = std::move(norm);
    } else if (*seen != norm) {
      return false;
    }
  }
  return true;
}

}  // namespace

KnowledgeRegion assign_region(const BehaviorProfile& profile, const RegionThresholds& thresholds,
                              std::optional<Scalar> mastered_uncertainty_ceiling) {
  validate(thresholds);
  Scalar mastered_cut = thresholds.mastered_floor;
  Scalar missing_cut = thresholds.missing_ceiling;
  if (thresholds.tolerance > 0.0 && correct_answers_consistent(profile)) {
    mastered_cut -= thresholds.tolerance;
    missing_cut += thresholds.tolerance;
  }

  KnowledgeRegion region;
  if (profile.mean_accuracy >= mastered_cut) {
    region = KnowledgeRegion::Mastered;
  } else if (profile.mean_accuracy <= missing_cut) {
    region = KnowledgeRegion::Missing;
  } else {
    region = KnowledgeRegion::Confused;
  }
  if (region == KnowledgeRegion::Mastered && mastered_uncertainty_ceiling &&
      profile.mean_uncertainty > *mastered_uncertainty_ceiling) {
    region = KnowledgeRegion::Confused;
  }
  return region;
}

std::string normalize_answer(std::string_view text) {
  std::string stripped;
  stripped.reserve(text.size());
  for (const char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::ispunct(uc)) continue;
    stripped.push_back(static_cast<char>(std::tolower(uc)));
  }

  std::string collapsed;
  collapsed.reserve(stripped.size());
  bool in_space = true;  // also trims leading whitespace
  for (const char c : stripped) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) collapsed.push_back(' ');
      in_space = true;
    } else {
      collapsed.push_back(c);
      in_space = false;
    }
  }
  while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();

  for (const std::string_view article : {"a ", "an ", "the "}) {
    while (collapsed.starts_with(article)) collapsed.erase(0, article.size());
  }
  return collapsed;
}

bool grade_answer(std::string_view candidate, std::string_view gold, GradeMode mode) {
  const auto trimmed_empty = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
  };
  if (trimmed_empty(gold)) throw InvalidInput("grade_answer: empty gold answer");
  if (trimmed_empty(candidate)) throw InvalidInput("grade_answer: empty candidate");

  const std::string c = normalize_answer(candidate);
  const std::string g = normalize_answer(gold);
  if (mode == GradeMode::Equality) return c == g;
  return !g.empty() && c.find(g) != std::string::npos;
}

AugmentationStrategy strategy_for(KnowledgeRegion region) {
  switch (region) {
    case KnowledgeRegion::Missing: return AugmentationStrategy::EpistemicFoundation;
    case KnowledgeRegion::Confused: return AugmentationStrategy::StructuralDisambiguation;
    case KnowledgeRegion::Mastered: return AugmentationStrategy::BoundaryExpansion;
  }
  return AugmentationStrategy::StructuralDisambiguation;
}

AugmentationManifest emit_manifest(const BehaviorProfile& profile, KnowledgeRegion region,
                                   std::vector<std::string> tags) {
  AugmentationManifest manifest;
  manifest.query_id = profile.query_id;
  manifest.region = region;
  manifest.strategy = strategy_for(region);
  manifest.search_query_template = profile.query_id + " {tags}";

  std::string joined;
  for (const std::string& tag : tags) {
    if (!joined.empty()) joined += ' ';
    joined += tag;
  }
  manifest.cognitive_tags = std::move(tags);

  std::string query = manifest.search_query_template;
  const std::string placeholder = "{tags}";
  if (const auto pos = query.find(placeholder); pos != std::string::npos) {
    query.replace(pos, placeholder.size(), joined);
  }
  while (!query.empty() && query.back() == ' ') query.pop_back();
  manifest.search_query = std::move(query);
  return manifest;
}

}  // namespace metacog
