// SPDX-License-Identifier: Apache-2.0
#pragma once

// Calibration quality (equal-mass ECE) and the meta-cognitive decision
// metrics built on TP/FN/TN/FP counts over answerable and unanswerable
// questions.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metacog/types.hpp"

namespace metacog {

/// Ground truth plus the model's answer/abstain decision for one question.
struct DecisionRecord {
  std::string query_id;
  bool answerable = true;
  bool abstained = false;
  std::optional<bool> correct;       // absent when abstained
  std::optional<Scalar> uncertainty; // NLL per token, feeds the ECE pair
};

enum class CognitiveState { TP, FN, TN, FP };

const char* to_string(CognitiveState state);

struct ConfusionCounts {
  long tp = 0;
  long fn = 0;
  long tn = 0;
  long fp = 0;
};

/// Ratio metrics; a field is absent when its denominator is zero.
struct CognitiveReport {
  ConfusionCounts counts;
  std::optional<Scalar> ar;   // TP / (TP + FP)
  std::optional<Scalar> kei;  // TP / (TP + FN)
  std::optional<Scalar> npv;  // TN / (TN + FN)
  std::optional<Scalar> cbs;  // harmonic mean of ar and kei
  std::optional<Scalar> cae;  // (TP + TN) / total
};

struct CalibrationBin {
  long count = 0;
  Scalar mean_confidence = 0.0;
  Scalar mean_accuracy = 0.0;
};

struct CalibrationReport {
  Scalar ece = 0.0;
  std::vector<CalibrationBin> bins;
  int m = 1;
};

struct ConfidencePair {
  Scalar confidence = 1.0;  // in (0, 1]
  bool correct = false;
};

/// Per-category decision shares; a side is absent when it has no records.
struct BehaviorRates {
  std::optional<std::pair<Scalar, Scalar>> answerable;    // (tp, fn) as fractions
  std::optional<std::pair<Scalar, Scalar>> unanswerable;  // (tn, fp) as fractions
};

CognitiveState classify_decision(const DecisionRecord& record);

void validate(const DecisionRecord& record);

ConfusionCounts count_decisions(std::span<const DecisionRecord> records);

/// All five ratio metrics from counts. Throws InvalidInput when every count
/// is zero.
CognitiveReport cognitive_metrics(const ConfusionCounts& counts);

/// Harmonic mean 2*ar*kei/(ar+kei); absent when the denominator is zero.
std::optional<Scalar> cbs_from(Scalar ar, Scalar kei);

/// Equal-mass expected calibration error: sort by confidence ascending
/// (stable), split into m contiguous bins with sizes differing by at most
/// one (larger bins first), then weight each bin's |accuracy - confidence|
/// gap by its share of N. Requires N >= m >= 1 and confidences in (0, 1].
CalibrationReport ece_equal_mass(std::span<const ConfidencePair> pairs, int m);

BehaviorRates behavior_distribution(std::span<const DecisionRecord> records);

inline const std::vector<std::string>& default_abstention_markers() {
  static const std::vector<std::string> markers = {"the answer is unknown"};
  return markers;
}

/// True when the normalized text contains any marker phrase.
bool is_abstention(std::string_view text,
                   std::span<const std::string> markers = default_abstention_markers());

}  // namespace metacog
