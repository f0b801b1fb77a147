// SPDX-License-Identifier: Apache-2.0
#include "metacog/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metacog/errors.hpp"
#include "metacog/regions.hpp"

namespace metacog {

const char* to_string(CognitiveState state) {
  switch (state) {
    case CognitiveState::TP: return "TP";
    case CognitiveState::FN: return "FN";
    case CognitiveState::TN: return "TN";
    case CognitiveState::FP: return "FP";
  }
  return "TP";
}

void validate(const DecisionRecord& record) {
  if (record.abstained && record.correct.has_value())
    throw InvalidInput("decision record: abstained records carry no correctness label");
  if (record.uncertainty && (!std::isfinite(*record.uncertainty) || *record.uncertainty < 0.0))
    throw InvalidInput("decision record: uncertainty must be finite and >= 0");
}

CognitiveState classify_decision(const DecisionRecord& record) {
  if (record.answerable) return record.abstained ? CognitiveState::FN : CognitiveState::TP;
  return record.abstained ? CognitiveState::TN : CognitiveState::FP;
}

ConfusionCounts count_decisions(std::span<const DecisionRecord> records) {
  ConfusionCounts counts;
  for (const DecisionRecord& r : records) {
    switch (classify_decision(r)) {
      case CognitiveState::TP: ++counts.tp; break;
      case CognitiveState::FN: ++counts.fn; break;
      case CognitiveState::TN: ++counts.tn; break;
      case CognitiveState::FP: ++counts.fp; break;
    }
  }
  return counts;
}

std::optional<Scalar> cbs_from(Scalar ar, Scalar kei) {
  if (ar + kei <= 0.0) return std::nullopt;
  return 2.0 * ar * kei / (ar + kei);
}

CognitiveReport cognitive_metrics(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fn < 0 || c.tn < 0 || c.fp < 0)
    throw InvalidInput("cognitive_metrics: negative count");
  const long total = c.tp + c.fn + c.tn + c.fp;
  if (total == 0) throw InvalidInput("cognitive_metrics: all counts are zero");

  const auto ratio = [](long num, long den) -> std::optional<Scalar> {
    if (den == 0) return std::nullopt;
    return static_cast<Scalar>(num) / static_cast<Scalar>(den);
  };

  CognitiveReport report;
  report.counts = c;
  report.ar = ratio(c.tp, c.tp + c.fp);
  report.kei = ratio(c.tp, c.tp + c.fn);
  report.npv = ratio(c.tn, c.tn + c.fn);
  report.cae = ratio(c.tp + c.tn, total);
  if (report.ar && report.kei) report.cbs = cbs_from(*report.ar, *report.kei);
  return report;
}

CalibrationReport ece_equal_mass(std::span<const ConfidencePair> pairs, int m) {
  const auto n = static_cast<long>(pairs.size());
  if (m < 1) throw InvalidInput("ece_equal_mass: m must be >= 1");
  if (n < m) throw InvalidInput("ece_equal_mass: need at least m pairs");
  for (const ConfidencePair& p : pairs) {
    if (!(p.confidence > 0.0) || p.confidence > 1.0 || !std::isfinite(p.confidence))
      throw InvalidInput("ece_equal_mass: confidence outside (0, 1]");
  }

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pairs[a].confidence < pairs[b].confidence;
  });

  CalibrationReport report;
  report.m = m;
  const long base = n / m;
  const long remainder = n % m;  // the first `remainder` bins take one extra

  std::size_t cursor = 0;
  Scalar ece = 0.0;
  for (int bin = 0; bin < m; ++bin) {
    const long size = base + (bin < remainder ? 1 : 0);
    Scalar conf_sum = 0.0, acc_sum = 0.0;
    for (long i = 0; i < size; ++i, ++cursor) {
      const ConfidencePair& p = pairs[order[cursor]];
      conf_sum += p.confidence;
      acc_sum += p.correct ? 1.0 : 0.0;
    }
    CalibrationBin b;
    b.count = size;
    b.mean_confidence = conf_sum / size;
    b.mean_accuracy = acc_sum / size;
    report.bins.push_back(b);
    ece += (static_cast<Scalar>(size) / n) * std::abs(b.mean_accuracy - b.mean_confidence);
  }
  report.ece = ece;
  return report;
}

BehaviorRates behavior_distribution(std::span<const DecisionRecord> records) {
  const ConfusionCounts c = count_decisions(records);
  BehaviorRates rates;
  if (const long answerable = c.tp + c.fn; answerable > 0) {
    rates.answerable = {static_cast<Scalar>(c.tp) / answerable,
                        static_cast<Scalar>(c.fn) / answerable};
  }
  if (const long unanswerable = c.tn + c.fp; unanswerable > 0) {
    rates.unanswerable = {static_cast<Scalar>(c.tn) / unanswerable,
                          static_cast<Scalar>(c.fp) / unanswerable};
  }
  return rates;
}

bool is_abstention(std::string_view text, std::span<const std::string> markers) {
  const std::string norm = normalize_answer(text);
  for (const std::string& marker : markers) {
    if (norm.find(normalize_answer(marker)) != std::string::npos) return true;
  }
  return false;
}

}  // namespace metacog
