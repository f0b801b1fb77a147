// SPDX-License-Identifier: Apache-2.0
#include "metacog/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>

#include "metacog/decay.hpp"
#include "metacog/errors.hpp"
#include "metacog/io.hpp"
#include "metacog/metrics.hpp"
#include "metacog/synthetic.hpp"
#include "metacog/version.hpp"

namespace metacog::cli {

namespace {

using nlohmann::json;

void check_command(const json& j, const char* name) {
  if (const auto it = j.find("command"); it != j.end() && it->get<std::string>() != name)
    throw InvalidInput(std::string("config file is for command '") +
                       it->get<std::string>() + "', expected '" + name + "'");
}

json ingest_json(const IngestReport& report) {
  return {{"lines_read", report.lines_read},
          {"accepted", report.accepted},
          {"rejected", report.rejected}};
}

json optional_json(const std::optional<Scalar>& value) {
  if (!value) return nullptr;
  return *value;
}

std::string csv_value(const std::optional<Scalar>& value) {
  return value ? format_double(*value) : std::string();
}

}  // namespace

// ---------------------------------------------------------------------------
// fit-decay
// ---------------------------------------------------------------------------

json FitDecayOptions::to_json() const {
  return {{"command", "fit-decay"}, {"input", input.string()}, {"lenient", lenient},
          {"m", m},                 {"k", k_expected},         {"count_weighted", count_weighted}};
}

void FitDecayOptions::apply(const json& j) {
  check_command(j, "fit-decay");
  if (j.contains("input")) input = j.at("input").get<std::string>();
  lenient = j.value("lenient", lenient);
  m = j.value("m", m);
  k_expected = j.value("k", k_expected);
  count_weighted = j.value("count_weighted", count_weighted);
}

std::string run_fit_decay(const FitDecayOptions& options, const std::filesystem::path& out_dir) {
  auto [samples, ingest] =
      ingest_samples(options.input, options.lenient ? IngestMode::Lenient : IngestMode::Strict);
  const std::vector<QueryAggregate> aggregates = aggregate_queries(samples);

  long k_mismatch = 0;
  for (const QueryAggregate& agg : aggregates)
    if (agg.k != options.k_expected) ++k_mismatch;
  if (k_mismatch > 0) {
    std::cerr << "warning: " << k_mismatch << " queries have k != " << options.k_expected
              << "\n";
  }

  std::vector<BinCentroid> centroids;
  try {
    centroids = bin_equidistant(aggregates, options.m);
  } catch (const DegenerateRange& err) {
    throw InsufficientData(std::string(err.what()) +
                           " (hint: the corpus needs spread in uncertainty to fit a decay)");
  }

  DecayFitConfig fit_config;
  fit_config.count_weighted = options.count_weighted;
  DecayFit fit;
  try {
    fit = fit_decay(centroids, fit_config);
  } catch (const InsufficientData& err) {
    throw InsufficientData(std::string(err.what()) +
                           " (hint: lower --m or ingest more queries)");
  }

  std::ostringstream csv;
  csv << "bin_index,phi,psi,count\n";
  for (const BinCentroid& c : fit.centroids) {
    csv << c.bin_index << ',' << format_double(c.phi) << ',' << format_double(c.psi) << ','
        << c.count << '\n';
  }
  write_text_file(out_dir / "centroids.csv", csv.str());

  json report;
  report["a"] = fit.a;
  report["b"] = fit.b;
  report["rmse"] = fit.rmse;
  report["r_squared"] = fit.r_squared;
  report["iterations"] = fit.iterations;
  report["converged"] = fit.converged;
  report["centroid_count"] = fit.centroids.size();
  report["queries"] = aggregates.size();
  report["k_mismatch_queries"] = k_mismatch;
  report["ingest"] = ingest_json(ingest);
  report["config"] = options.to_json();
  report["version"] = kVersion;
  write_text_file(out_dir / "decay_fit.json", report.dump(2) + "\n");

  return "fit-decay: a=" + format_double(fit.a) + " b=" + format_double(fit.b) + " over " +
         std::to_string(fit.centroids.size()) + " centroids -> " +
         (out_dir / "decay_fit.json").string();
}

// ---------------------------------------------------------------------------
// assign-regions
// ---------------------------------------------------------------------------

json AssignRegionsOptions::to_json() const {
  return {{"command", "assign-regions"},
          {"input", input.string()},
          {"gold", gold.string()},
          {"lenient", lenient},
          {"mastered_floor", thresholds.mastered_floor},
          {"missing_ceiling", thresholds.missing_ceiling},
          {"tolerance", thresholds.tolerance},
          {"uncertainty_veto", uncertainty_veto}};
}

void AssignRegionsOptions::apply(const json& j) {
  check_command(j, "assign-regions");
  if (j.contains("input")) input = j.at("input").get<std::string>();
  if (j.contains("gold")) gold = j.at("gold").get<std::string>();
  lenient = j.value("lenient", lenient);
  thresholds.mastered_floor = j.value("mastered_floor", thresholds.mastered_floor);
  thresholds.missing_ceiling = j.value("missing_ceiling", thresholds.missing_ceiling);
  thresholds.tolerance = j.value("tolerance", thresholds.tolerance);
  uncertainty_veto = j.value("uncertainty_veto", uncertainty_veto);
}

std::string run_assign_regions(const AssignRegionsOptions& options,
                               const std::filesystem::path& out_dir) {
  validate(options.thresholds);
  auto [samples, ingest] =
      ingest_samples(options.input, options.lenient ? IngestMode::Lenient : IngestMode::Strict);

  std::map<std::string, std::string> gold_answers;
  if (!options.gold.empty()) {
    const auto [golds, gold_ingest] = ingest_gold_answers(
        options.gold, options.lenient ? IngestMode::Lenient : IngestMode::Strict);
    (void)gold_ingest;
    for (const GoldAnswer& g : golds) gold_answers[g.query_id] = g.gold;
  }

  // Group in first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<ResponseSample>> groups;
  for (ResponseSample& s : samples) {
    auto [it, inserted] = groups.try_emplace(s.query_id);
    if (inserted) order.push_back(s.query_id);
    it->second.push_back(std::move(s));
  }

  std::vector<BehaviorProfile> profiles;
  profiles.reserve(order.size());
  for (const std::string& qid : order) {
    std::optional<std::string> gold;
    if (const auto it = gold_answers.find(qid); it != gold_answers.end()) gold = it->second;
    profiles.push_back(build_profile(groups.at(qid), std::move(gold)));
  }

  std::optional<Scalar> veto_ceiling;
  if (options.uncertainty_veto) {
    std::vector<Scalar> u;
    u.reserve(profiles.size());
    for (const BehaviorProfile& p : profiles) u.push_back(p.mean_uncertainty);
    std::sort(u.begin(), u.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(0.9 * static_cast<double>(u.size()))); // nearest-rank Q90
    veto_ceiling = u[std::min(u.size() - 1, rank == 0 ? 0 : rank - 1)];
  }

  std::ostringstream jsonl;
  std::map<std::string, long> counts;
  std::map<std::string, Scalar> uncertainty_sums;
  for (const BehaviorProfile& profile : profiles) {
    const KnowledgeRegion region =
        assign_region(profile, options.thresholds, veto_ceiling);
    const AugmentationManifest manifest = emit_manifest(profile, region, {});
    json line;
    line["query_id"] = manifest.query_id;
    line["region"] = to_string(manifest.region);
    line["strategy"] = to_string(manifest.strategy);
    line["cognitive_tags"] = manifest.cognitive_tags;
    line["search_query"] = manifest.search_query;
    jsonl << line.dump() << '\n';
    counts[to_string(region)] += 1;
    uncertainty_sums[to_string(region)] += profile.mean_uncertainty;
  }
  write_text_file(out_dir / "regions.jsonl", jsonl.str());

  json summary;
  summary["counts"] = {{"Mastered", counts["Mastered"]},
                       {"Confused", counts["Confused"]},
                       {"Missing", counts["Missing"]}};
  json mean_u;
  for (const char* name : {"Mastered", "Confused", "Missing"}) {
    if (counts[name] > 0) {
      mean_u[name] = uncertainty_sums[name] / counts[name];
    } else {
      mean_u[name] = nullptr;
    }
  }
  summary["mean_uncertainty"] = mean_u;
  summary["total_queries"] = profiles.size();
  if (veto_ceiling) summary["uncertainty_veto_ceiling"] = *veto_ceiling;
  summary["ingest"] = ingest_json(ingest);
  summary["config"] = options.to_json();
  summary["version"] = kVersion;
  write_text_file(out_dir / "regions_summary.json", summary.dump(2) + "\n");

  return "assign-regions: " + std::to_string(profiles.size()) + " queries (Mastered " +
         std::to_string(counts["Mastered"]) + ", Confused " + std::to_string(counts["Confused"]) +
         ", Missing " + std::to_string(counts["Missing"]) + ") -> " +
         (out_dir / "regions.jsonl").string();
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

json MetricsOptions::to_json() const {
  return {{"command", "metrics"},
          {"input", input.string()},
          {"lenient", lenient},
          {"bins", bins},
          {"markers", markers}};
}

void MetricsOptions::apply(const json& j) {
  check_command(j, "metrics");
  if (j.contains("input")) input = j.at("input").get<std::string>();
  lenient = j.value("lenient", lenient);
  bins = j.value("bins", bins);
  if (j.contains("markers")) markers = j.at("markers").get<std::vector<std::string>>();
}

namespace {

std::string metrics_csv(const CognitiveReport& report, const BehaviorRates& rates,
                        const std::optional<Scalar>& ece) {
  std::ostringstream csv;
  csv << "metric,value\n";
  csv << "tp," << report.counts.tp << '\n';
  csv << "fn," << report.counts.fn << '\n';
  csv << "tn," << report.counts.tn << '\n';
  csv << "fp," << report.counts.fp << '\n';
  csv << "ar," << csv_value(report.ar) << '\n';
  csv << "kei," << csv_value(report.kei) << '\n';
  csv << "npv," << csv_value(report.npv) << '\n';
  csv << "cbs," << csv_value(report.cbs) << '\n';
  csv << "cae," << csv_value(report.cae) << '\n';
  const auto pair_value = [](const std::optional<std::pair<Scalar, Scalar>>& p, bool first) {
    return p ? format_double(first ? p->first : p->second) : std::string();
  };
  csv << "tp_rate_answerable," << pair_value(rates.answerable, true) << '\n';
  csv << "fn_rate_answerable," << pair_value(rates.answerable, false) << '\n';
  csv << "tn_rate_unanswerable," << pair_value(rates.unanswerable, true) << '\n';
  csv << "fp_rate_unanswerable," << pair_value(rates.unanswerable, false) << '\n';
  csv << "ece," << csv_value(ece) << '\n';
  return csv.str();
}

json calibration_json(const CalibrationReport& report) {
  json bins = json::array();
  for (const CalibrationBin& b : report.bins) {
    bins.push_back({{"count", b.count},
                    {"mean_confidence", b.mean_confidence},
                    {"mean_accuracy", b.mean_accuracy}});
  }
  return {{"ece", report.ece}, {"m", report.m}, {"bins", std::move(bins)}};
}

}  // namespace

std::string run_metrics(const MetricsOptions& options, const std::filesystem::path& out_dir) {
  const std::vector<std::string>& markers =
      options.markers.empty() ? default_abstention_markers() : options.markers;
  auto [records, ingest] = ingest_decisions(
      options.input, options.lenient ? IngestMode::Lenient : IngestMode::Strict, markers);

  const ConfusionCounts counts = count_decisions(records);
  const CognitiveReport cognitive = cognitive_metrics(counts);
  const BehaviorRates rates = behavior_distribution(records);

  std::vector<ConfidencePair> pairs;
  for (const DecisionRecord& r : records) {
    if (r.uncertainty && r.correct)
      pairs.push_back({confidence_from_uncertainty(UncertaintyValue{*r.uncertainty}), *r.correct});
  }
  std::optional<CalibrationReport> calibration;
  if (static_cast<int>(pairs.size()) >= std::max(1, options.bins))
    calibration = ece_equal_mass(pairs, options.bins);

  json report;
  report["counts"] = {{"tp", counts.tp}, {"fn", counts.fn}, {"tn", counts.tn}, {"fp", counts.fp}};
  report["metrics"] = {{"ar", optional_json(cognitive.ar)},
                       {"kei", optional_json(cognitive.kei)},
                       {"npv", optional_json(cognitive.npv)},
                       {"cbs", optional_json(cognitive.cbs)},
                       {"cae", optional_json(cognitive.cae)}};
  if (rates.answerable) {
    report["behavior"]["answerable"] = {{"tp_rate", rates.answerable->first},
                                        {"fn_rate", rates.answerable->second}};
  } else {
    report["behavior"]["answerable"] = nullptr;
  }
  if (rates.unanswerable) {
    report["behavior"]["unanswerable"] = {{"tn_rate", rates.unanswerable->first},
                                          {"fp_rate", rates.unanswerable->second}};
  } else {
    report["behavior"]["unanswerable"] = nullptr;
  }
  report["calibration_pairs"] = pairs.size();
  report["ingest"] = ingest_json(ingest);
  report["config"] = options.to_json();
  report["version"] = kVersion;
  write_text_file(out_dir / "cognitive_report.json", report.dump(2) + "\n");

  std::optional<Scalar> ece;
  if (calibration) {
    ece = calibration->ece;
    json cal = calibration_json(*calibration);
    cal["n"] = pairs.size();
    cal["config"] = options.to_json();
    cal["version"] = kVersion;
    write_text_file(out_dir / "calibration_report.json", cal.dump(2) + "\n");
  }
  write_text_file(out_dir / "metrics.csv", metrics_csv(cognitive, rates, ece));

  return "metrics: " + std::to_string(records.size()) + " decisions (tp=" +
         std::to_string(counts.tp) + " fn=" + std::to_string(counts.fn) + " tn=" +
         std::to_string(counts.tn) + " fp=" + std::to_string(counts.fp) + ") -> " +
         (out_dir / "cognitive_report.json").string();
}

// ---------------------------------------------------------------------------
// ece
// ---------------------------------------------------------------------------

json EceOptions::to_json() const {
  return {{"command", "ece"}, {"input", input.string()}, {"lenient", lenient}, {"bins", bins}};
}

void EceOptions::apply(const json& j) {
  check_command(j, "ece");
  if (j.contains("input")) input = j.at("input").get<std::string>();
  lenient = j.value("lenient", lenient);
  bins = j.value("bins", bins);
}

std::string run_ece(const EceOptions& options, const std::filesystem::path& out_dir) {
  auto [samples, ingest] =
      ingest_samples(options.input, options.lenient ? IngestMode::Lenient : IngestMode::Strict);

  std::vector<ConfidencePair> pairs;
  pairs.reserve(samples.size());
  for (const ResponseSample& s : samples) {
    const UncertaintyValue u = sequence_uncertainty(std::span<const Scalar>(s.token_logprobs));
    pairs.push_back({confidence_from_uncertainty(u), s.correct});
  }
  const CalibrationReport report = ece_equal_mass(pairs, options.bins);

  json out = calibration_json(report);
  out["n"] = pairs.size();
  out["ingest"] = ingest_json(ingest);
  out["config"] = options.to_json();
  out["version"] = kVersion;
  write_text_file(out_dir / "calibration_report.json", out.dump(2) + "\n");

  std::ostringstream csv;
  csv << "metric,value\n";
  csv << "ece," << format_double(report.ece) << '\n';
  write_text_file(out_dir / "metrics.csv", csv.str());

  return "ece: " + format_double(report.ece) + " over " + std::to_string(pairs.size()) +
         " pairs in " + std::to_string(report.m) + " bins -> " +
         (out_dir / "calibration_report.json").string();
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

json SimulateOptions::to_json() const {
  json j = metacog::to_json(scenario);
  j["command"] = "simulate";
  j["variant"] = to_string(variant);
  return j;
}

void SimulateOptions::apply(const json& j) {
  check_command(j, "simulate");
  scenario = scenario_config_from_json(j);
  if (j.contains("variant")) {
    const auto parsed = variant_from_string(j.at("variant").get<std::string>());
    if (!parsed) throw InvalidInput("variant must be 'grpo' or 'cdkc'");
    variant = *parsed;
  }
}

std::string run_simulate(const SimulateOptions& options, const std::filesystem::path& out_dir) {
  const ScenarioTrace trace = run_scenario(options.scenario, options.variant);
  write_text_file(out_dir / "trace.csv", trace_csv(trace));

  long steps_with_correct = 0, escape_holds = 0, flatten_holds = 0;
  for (const ScenarioStep& s : trace.steps) {
    if (!std::isnan(s.mean_entropy_correct)) {
      ++steps_with_correct;
      if (s.escape_lhs > s.escape_rhs) ++escape_holds;
    }
    if (s.flatten_lhs > s.flatten_rhs) ++flatten_holds;
  }

  json verdict;
  verdict["verdict"] = to_string(trace.verdict);
  verdict["steps_run"] = trace.steps.size();
  verdict["initial"] = {{"p_gold", trace.initial_p_gold},
                        {"p_refusal", trace.initial_p_refusal}};
  if (!trace.steps.empty()) {
    const ScenarioStep& last = trace.steps.back();
    verdict["final"] = {{"p_gold", last.p_gold},
                        {"p_refusal", last.p_refusal},
                        {"mean_entropy_correct", last.mean_entropy_correct},
                        {"mean_entropy_incorrect", last.mean_entropy_incorrect}};
  } else {
    verdict["final"] = nullptr;
  }
  verdict["escape_inequality"] = {{"steps_with_correct_paths", steps_with_correct},
                                  {"holds_on", escape_holds}};
  verdict["flatten_inequality"] = {{"holds_on", flatten_holds}};
  verdict["config"] = options.to_json();
  verdict["version"] = kVersion;
  write_text_file(out_dir / "verdict.json", verdict.dump(2) + "\n");

  return "simulate: " + options.scenario.name + " (" + to_string(options.variant) + ", " +
         std::to_string(trace.steps.size()) + " steps) verdict=" + to_string(trace.verdict) +
         " -> " + (out_dir / "verdict.json").string();
}

// ---------------------------------------------------------------------------
// gen-synthetic
// ---------------------------------------------------------------------------

json GenSyntheticOptions::to_json() const {
  json j = {{"command", "gen-synthetic"}, {"law", law}, {"seed", seed}, {"n", n}, {"k", k}};
  if (law == "decay") {
    j["a"] = a;
    j["b"] = b;
  } else if (law == "miscalibrated") {
    j["gap"] = gap;
  } else if (law == "region-mix") {
    j["counts"] = counts;
    j["accuracies"] = accuracies;
  }
  return j;
}

void GenSyntheticOptions::apply(const json& j) {
  check_command(j, "gen-synthetic");
  law = j.value("law", law);
  seed = j.value("seed", seed);
  n = j.value("n", n);
  k = j.value("k", k);
  a = j.value("a", a);
  b = j.value("b", b);
  gap = j.value("gap", gap);
  if (j.contains("counts")) counts = j.at("counts").get<std::vector<int>>();
  if (j.contains("accuracies")) accuracies = j.at("accuracies").get<std::vector<Scalar>>();
}

std::string run_gen_synthetic(const GenSyntheticOptions& options,
                              const std::filesystem::path& out_dir) {
  std::vector<ResponseSample> corpus;
  if (options.law == "decay") {
    DecayCorpusSpec spec;
    spec.a = options.a;
    spec.b = options.b;
    spec.n_queries = options.n;
    spec.k = options.k;
    spec.seed = options.seed;
    corpus = gen_decay_corpus(spec);
  } else if (options.law == "calibrated" || options.law == "miscalibrated") {
    CalibratedPairsSpec spec;
    spec.n = options.n;
    spec.gap = options.law == "calibrated" ? 0.0 : options.gap;
    spec.seed = options.seed;
    corpus = gen_calibrated_corpus(spec);
  } else if (options.law == "region-mix") {
    if (options.counts.size() != options.accuracies.size())
      throw InvalidInput("region-mix: counts and accuracies must have equal length");
    RegionMixSpec spec;
    spec.k = options.k;
    spec.seed = options.seed;
    spec.blocks.clear();
    for (std::size_t i = 0; i < options.counts.size(); ++i) {
      // Uncertainty bands rise as planted accuracy falls.
      const Scalar u = 0.05 + 2.5 * (1.0 - options.accuracies[i]);
      spec.blocks.push_back({options.counts[i], options.accuracies[i], u});
    }
    corpus = gen_region_mix_corpus(spec);
  } else {
    throw InvalidInput("unknown synthetic law: " + options.law);
  }

  write_samples_jsonl(out_dir / "corpus.jsonl", corpus);

  json meta;
  meta["law"] = options.law;
  meta["lines"] = corpus.size();
  meta["config"] = options.to_json();
  meta["version"] = kVersion;
  write_text_file(out_dir / "corpus_meta.json", meta.dump(2) + "\n");

  return "gen-synthetic: " + options.law + " corpus with " + std::to_string(corpus.size()) +
         " lines -> " + (out_dir / "corpus.jsonl").string();
}

}  // namespace metacog::cli
