// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSONL ingestion and file emission. This is the only layer that touches
// JSON or the filesystem; everything above it works on validated structs.

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metacog/metrics.hpp"
#include "metacog/scenario.hpp"
#include "metacog/signals.hpp"
#include "metacog/types.hpp"

namespace metacog {

struct IngestIssue {
  long line = 0;  // 1-based
  std::string message;
};

struct IngestReport {
  long lines_read = 0;
  long accepted = 0;
  long rejected = 0;
  std::vector<IngestIssue> issues;
};

enum class IngestMode { Strict, Lenient };

/// Parse one JSONL object into a validated ResponseSample. Throws
/// InvalidInput with a reason.
ResponseSample sample_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ResponseSample& sample);

/// Decision records accept either an explicit "abstained" flag or an
/// "answer" string matched against the abstention markers.
DecisionRecord decision_from_json(const nlohmann::json& j,
                                  std::span<const std::string> markers);
nlohmann::json to_json(const DecisionRecord& record);

/// Strict mode throws on the first bad line (naming it); lenient mode
/// collects issues and continues. Zero accepted lines raise EmptyInput,
/// an unreadable path raises IoError.
std::pair<std::vector<ResponseSample>, IngestReport> ingest_samples(
    const std::filesystem::path& path, IngestMode mode);

std::pair<std::vector<DecisionRecord>, IngestReport> ingest_decisions(
    const std::filesystem::path& path, IngestMode mode,
    std::span<const std::string> markers = default_abstention_markers());

/// Gold-answer dataset: JSONL lines {"query_id": ..., "gold": ...}.
struct GoldAnswer {
  std::string query_id;
  std::string gold;
};

std::pair<std::vector<GoldAnswer>, IngestReport> ingest_gold_answers(
    const std::filesystem::path& path, IngestMode mode);

/// Shortest round-trip decimal form, identical across reruns.
std::string format_double(Scalar value);

void write_text_file(const std::filesystem::path& path, const std::string& content);

void write_samples_jsonl(const std::filesystem::path& path,
                         std::span<const ResponseSample> samples);

nlohmann::json to_json(const ScenarioConfig& config);
ScenarioConfig scenario_config_from_json(const nlohmann::json& j);

/// Frozen column order: step,loss_pg,loss_kl,loss_cal,p_gold,p_refusal,
/// mean_entropy_correct,mean_entropy_incorrect,escape_lhs,escape_rhs.
std::string trace_csv(const ScenarioTrace& trace);

}  // namespace metacog
