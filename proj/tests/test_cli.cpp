// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "metacog/cli.hpp"
#include "metacog/errors.hpp"
#include "metacog/io.hpp"
#include "metacog/synthetic.hpp"

using namespace metacog;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("metacog_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

nlohmann::json load(const fs::path& path) { return nlohmann::json::parse(slurp(path)); }

}  // namespace

TEST_CASE("assign-regions classifies an engineered corpus and honors overrides") {
  const fs::path dir = fresh_dir("regions");

  cli::GenSyntheticOptions gen;
  gen.law = "region-mix";
  gen.counts = {1, 1, 1};
  gen.accuracies = {1.0, 0.5, 0.0};
  gen.k = 16;
  gen.seed = 3;
  (void)cli::run_gen_synthetic(gen, dir);

  cli::AssignRegionsOptions assign;
  assign.input = dir / "corpus.jsonl";
  (void)cli::run_assign_regions(assign, dir / "default");
  const auto summary = load(dir / "default" / "regions_summary.json");
  CHECK(summary.at("counts").at("Mastered") == 1);
  CHECK(summary.at("counts").at("Confused") == 1);
  CHECK(summary.at("counts").at("Missing") == 1);
  CHECK(summary.at("total_queries") == 3);
  // Missing queries sit in the high-uncertainty band.
  CHECK(summary.at("mean_uncertainty").at("Missing").get<Scalar>() >
        summary.at("mean_uncertainty").at("Mastered").get<Scalar>());

  // A 14/16 = 0.875 block is Mastered by default but Confused at floor 0.9.
  cli::GenSyntheticOptions border = gen;
  border.counts = {1};
  border.accuracies = {0.875};
  (void)cli::run_gen_synthetic(border, dir / "border");
  cli::AssignRegionsOptions strict;
  strict.input = dir / "border" / "corpus.jsonl";
  (void)cli::run_assign_regions(strict, dir / "border" / "lo");
  CHECK(load(dir / "border" / "lo" / "regions_summary.json").at("counts").at("Mastered") == 1);
  strict.thresholds.mastered_floor = 0.9;
  (void)cli::run_assign_regions(strict, dir / "border" / "hi");
  CHECK(load(dir / "border" / "hi" / "regions_summary.json").at("counts").at("Confused") == 1);
}

TEST_CASE("assign-regions consumes a gold-answer dataset") {
  const fs::path dir = fresh_dir("gold");
  cli::GenSyntheticOptions gen;
  gen.law = "region-mix";
  gen.counts = {2};
  gen.accuracies = {1.0};
  gen.k = 4;
  gen.seed = 8;
  (void)cli::run_gen_synthetic(gen, dir);
  write_text_file(dir / "gold.jsonl",
                  "{\"query_id\":\"q0\",\"gold\":\"gold-0\"}\n"
                  "{\"query_id\":\"q1\",\"gold\":\"gold-0\"}\n");

  cli::AssignRegionsOptions assign;
  assign.input = dir / "corpus.jsonl";
  assign.gold = dir / "gold.jsonl";
  (void)cli::run_assign_regions(assign, dir / "out");
  const auto summary = load(dir / "out" / "regions_summary.json");
  CHECK(summary.at("counts").at("Mastered") == 2);
  CHECK(summary.at("config").at("gold").get<std::string>() == (dir / "gold.jsonl").string());
}

TEST_CASE("the uncertainty veto demotes confident-looking high-uncertainty queries") {
  const fs::path dir = fresh_dir("veto");
  // Ten low-uncertainty mastered queries and one high-uncertainty mastered
  // query; the Q90 veto demotes only the outlier.
  RegionMixSpec spec;
  spec.k = 8;
  spec.blocks = {{10, 1.0, 0.1}, {1, 1.0, 3.0}};
  spec.seed = 4;
  write_samples_jsonl(dir / "corpus.jsonl", gen_region_mix_corpus(spec));

  cli::AssignRegionsOptions assign;
  assign.input = dir / "corpus.jsonl";
  (void)cli::run_assign_regions(assign, dir / "plain");
  CHECK(load(dir / "plain" / "regions_summary.json").at("counts").at("Mastered") == 11);

  assign.uncertainty_veto = true;
  (void)cli::run_assign_regions(assign, dir / "veto");
  const auto vetoed = load(dir / "veto" / "regions_summary.json");
  CHECK(vetoed.at("counts").at("Mastered") == 10);
  CHECK(vetoed.at("counts").at("Confused") == 1);
}

TEST_CASE("metrics emits the full report set from a decision log") {
  const fs::path dir = fresh_dir("metrics");
  std::ostringstream lines;
  // 3 TP (one graded wrong but still an answer decision), 1 FN, 2 TN, 1 FP.
  const char* records[] = {
      R"({"query_id":"a","answerable":true,"abstained":false,"correct":true,"uncertainty":0.1})",
      R"({"query_id":"b","answerable":true,"abstained":false,"correct":true,"uncertainty":0.3})",
      R"({"query_id":"c","answerable":true,"abstained":false,"correct":false,"uncertainty":0.2})",
      R"({"query_id":"d","answerable":true,"answer":"the answer is unknown"})",
      R"({"query_id":"e","answerable":false,"abstained":true})",
      R"({"query_id":"f","answerable":false,"answer":"The Answer Is Unknown."})",
      R"({"query_id":"g","answerable":false,"abstained":false,"correct":false,"uncertainty":0.5})",
  };
  for (const char* r : records) lines << r << '\n';
  write_text_file(dir / "decisions.jsonl", lines.str());

  cli::MetricsOptions options;
  options.input = dir / "decisions.jsonl";
  options.bins = 2;
  (void)cli::run_metrics(options, dir / "out");

  const auto report = load(dir / "out" / "cognitive_report.json");
  CHECK(report.at("counts").at("tp") == 3);
  CHECK(report.at("counts").at("fn") == 1);
  CHECK(report.at("counts").at("tn") == 2);
  CHECK(report.at("counts").at("fp") == 1);
  CHECK(report.at("metrics").at("ar").get<Scalar>() == doctest::Approx(0.75));
  CHECK(report.at("metrics").at("kei").get<Scalar>() == doctest::Approx(0.75));
  CHECK(report.at("metrics").at("npv").get<Scalar>() == doctest::Approx(2.0 / 3.0));
  CHECK(report.at("metrics").at("cbs").get<Scalar>() == doctest::Approx(0.75));
  CHECK(report.at("metrics").at("cae").get<Scalar>() == doctest::Approx(5.0 / 7.0));
  CHECK(report.at("behavior").at("answerable").at("tp_rate").get<Scalar>() ==
        doctest::Approx(0.75));
  CHECK(report.at("calibration_pairs") == 4);

  const auto calibration = load(dir / "out" / "calibration_report.json");
  CHECK(calibration.at("m") == 2);
  CHECK(calibration.at("n") == 4);

  const std::string csv = slurp(dir / "out" / "metrics.csv");
  CHECK(csv.rfind("metric,value\n", 0) == 0);
  CHECK(csv.find("\ntp,3\n") != std::string::npos);
  CHECK(csv.find("\nar,0.75\n") != std::string::npos);
  CHECK(csv.find("\nece,") != std::string::npos);
}

TEST_CASE("metrics reports absences explicitly when a category is missing") {
  const fs::path dir = fresh_dir("metrics_absent");
  // Only abstentions on answerable questions: no answer was ever given, so
  // answer precision (and with it the balance score) has no denominator.
  write_text_file(dir / "decisions.jsonl",
                  R"({"query_id":"a","answerable":true,"abstained":true})"
                  "\n"
                  R"({"query_id":"b","answerable":true,"abstained":true})"
                  "\n");
  cli::MetricsOptions options;
  options.input = dir / "decisions.jsonl";
  (void)cli::run_metrics(options, dir / "out");
  const auto report = load(dir / "out" / "cognitive_report.json");
  CHECK(report.at("behavior").at("unanswerable").is_null());
  CHECK(report.at("metrics").at("ar").is_null());
  CHECK(report.at("metrics").at("cbs").is_null());
  CHECK(report.at("metrics").at("kei").get<Scalar>() == 0.0);
  CHECK(report.at("metrics").at("npv").get<Scalar>() == 0.0);
  CHECK(report.at("calibration_pairs") == 0);
  CHECK_FALSE(fs::exists(dir / "out" / "calibration_report.json"));

  const std::string csv = slurp(dir / "out" / "metrics.csv");
  CHECK(csv.find("\nar,\n") != std::string::npos);   // absent: empty value
  CHECK(csv.find("\nece,\n") != std::string::npos);
}

TEST_CASE("fit-decay caps centroids at the number of distinct uncertainties") {
  const fs::path dir = fresh_dir("distinct");
  std::vector<ResponseSample> corpus;
  for (int q = 0; q < 50; ++q) {
    ResponseSample s;
    s.query_id = "q" + std::to_string(q);
    s.sample_id = 0;
    const Scalar u = 0.05 + 0.05 * q;
    s.token_logprobs = {-u, -u};
    s.correct = q < 25;
    corpus.push_back(std::move(s));
  }
  write_samples_jsonl(dir / "corpus.jsonl", corpus);

  cli::FitDecayOptions options;
  options.input = dir / "corpus.jsonl";
  options.m = 100;
  options.k_expected = 1;
  (void)cli::run_fit_decay(options, dir / "out");
  const auto report = load(dir / "out" / "decay_fit.json");
  CHECK(report.at("centroid_count").get<int>() <= 50);
  CHECK(report.at("k_mismatch_queries") == 0);
}

TEST_CASE("fit-decay propagates insufficient data with a hint") {
  const fs::path dir = fresh_dir("insufficient");
  std::vector<ResponseSample> corpus;
  for (int q = 0; q < 4; ++q) {
    ResponseSample s;
    s.query_id = "q" + std::to_string(q);
    s.sample_id = 0;
    s.token_logprobs = {-1.0};  // a single shared uncertainty value
    s.correct = true;
    corpus.push_back(std::move(s));
  }
  write_samples_jsonl(dir / "corpus.jsonl", corpus);
  cli::FitDecayOptions options;
  options.input = dir / "corpus.jsonl";
  options.k_expected = 1;
  CHECK_THROWS_AS((void)cli::run_fit_decay(options, dir / "out"), InsufficientData);
}

TEST_CASE("simulate's verdict echo reproduces the run") {
  const fs::path dir = fresh_dir("sim_echo");
  cli::SimulateOptions options;
  options.scenario = preset("trap-grpo");
  options.scenario.train.steps = 40;
  options.variant = ScenarioVariant::Grpo;
  (void)cli::run_simulate(options, dir / "a");

  cli::SimulateOptions from_echo;
  from_echo.apply(load(dir / "a" / "verdict.json").at("config"));
  (void)cli::run_simulate(from_echo, dir / "b");
  CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
  CHECK(slurp(dir / "a" / "verdict.json") == slurp(dir / "b" / "verdict.json"));
}

TEST_CASE("simulate with zero steps is inconclusive") {
  const fs::path dir = fresh_dir("sim_zero");
  cli::SimulateOptions options;
  options.scenario = preset("trap-cdkc");
  options.scenario.train.steps = 0;
  (void)cli::run_simulate(options, dir);
  CHECK(load(dir / "verdict.json").at("verdict") == "inconclusive");
  const std::string csv = slurp(dir / "trace.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);  // header only
}

TEST_CASE("gen-synthetic rejects unknown laws") {
  cli::GenSyntheticOptions options;
  options.law = "zipf";
  CHECK_THROWS_AS((void)cli::run_gen_synthetic(options, fresh_dir("law")), InvalidInput);
}

TEST_CASE("miscalibrated corpora land near their planted gap") {
  const fs::path dir = fresh_dir("gap");
  cli::GenSyntheticOptions gen;
  gen.law = "miscalibrated";
  gen.n = 4000;
  gen.gap = 0.25;
  gen.seed = 6;
  (void)cli::run_gen_synthetic(gen, dir);

  cli::EceOptions ece;
  ece.input = dir / "corpus.jsonl";
  ece.bins = 10;
  (void)cli::run_ece(ece, dir);
  const Scalar measured = load(dir / "calibration_report.json").at("ece").get<Scalar>();
  // Levels below the gap clamp at zero accuracy, so the expected ECE sits a
  // little under the gap itself.
  CHECK(measured > 0.15);
  CHECK(measured < 0.26);
}
