// SPDX-License-Identifier: Apache-2.0
#pragma once

// Subcommand pipelines behind the command-line tool. Each command is a pure
// function of (input bytes, resolved options, seed): reruns produce
// byte-identical files. Every JSON report embeds the resolved options under
// "config" plus the toolkit version, and feeding that object back through
// --config reproduces the report.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metacog/regions.hpp"
#include "metacog/scenario.hpp"
#include "metacog/types.hpp"

namespace metacog::cli {

struct FitDecayOptions {
  std::filesystem::path input;
  bool lenient = false;
  int m = 100;          // equal-width uncertainty bins
  int k_expected = 16;  // warn when a query's sample count differs
  bool count_weighted = true;

  nlohmann::json to_json() const;
  void apply(const nlohmann::json& j);
};

struct AssignRegionsOptions {
  std::filesystem::path input;
  std::filesystem::path gold;  // optional gold-answer JSONL
  bool lenient = false;
  RegionThresholds thresholds;
  bool uncertainty_veto = false;  // demote Mastered above the Q90 uncertainty

  nlohmann::json to_json() const;
  void apply(const nlohmann::json& j);
};

struct MetricsOptions {
  std::filesystem::path input;
  bool lenient = false;
  int bins = 10;
  std::vector<std::string> markers;  // empty = default abstention marker

  nlohmann::json to_json() const;
  void apply(const nlohmann::json& j);
};

struct EceOptions {
  std::filesystem::path input;
  bool lenient = false;
  int bins = 10;

  nlohmann::json to_json() const;
  void apply(const nlohmann::json& j);
};

struct SimulateOptions {
  ScenarioConfig scenario;
  ScenarioVariant variant = ScenarioVariant::Cdkc;

  nlohmann::json to_json() const;
  void apply(const nlohmann::json& j);
};

struct GenSyntheticOptions {
  std::string law = "decay";  // decay | calibrated | miscalibrated | region-mix
  std::uint64_t seed = 1;
  int n = 10000;
  int k = 16;
  Scalar a = 0.8;
  Scalar b = 0.1;
  Scalar gap = 0.2;                                  // miscalibrated only
  std::vector<int> counts = {1, 1, 1};               // region-mix block sizes
  std::vector<Scalar> accuracies = {1.0, 0.5, 0.0};  // region-mix block accuracies

  nlohmann::json to_json() const;
  void apply(const nlohmann::json& j);
};

// Each command writes its report files into `out_dir` and returns a one-line
// human summary for stdout. Errors are thrown (see errors.hpp); the binary
// maps them to exit codes.
std::string run_fit_decay(const FitDecayOptions& options, const std::filesystem::path& out_dir);
std::string run_assign_regions(const AssignRegionsOptions& options,
                               const std::filesystem::path& out_dir);
std::string run_metrics(const MetricsOptions& options, const std::filesystem::path& out_dir);
std::string run_ece(const EceOptions& options, const std::filesystem::path& out_dir);
std::string run_simulate(const SimulateOptions& options, const std::filesystem::path& out_dir);
std::string run_gen_synthetic(const GenSyntheticOptions& options,
                              const std::filesystem::path& out_dir);

}  // namespace metacog::cli
