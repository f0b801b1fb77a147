// SPDX-License-Identifier: Apache-2.0

// Command-line front end: flag parsing and exit-code mapping only; the
// pipelines live in metacog::cli.
//
// Exit codes: 0 success, 1 usage, 2 data validation, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "metacog/cli.hpp"
#include "metacog/errors.hpp"
#include "metacog/io.hpp"
#include "metacog/version.hpp"

namespace {

using namespace metacog;

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("METACOG_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& err) {
    throw InvalidInput("config " + path.string() + ": " + err.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meta-cognition toolkit: uncertainty analysis, decay-law fitting, "
               "region assignment, decision metrics, and GRPO+CDKC simulations"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // --output-dir may follow the subcommand

  std::filesystem::path output_dir = default_output_dir();
  app.add_option("--output-dir", output_dir, "directory for emitted reports")
      ->envname("METACOG_OUTPUT_DIR");

  // fit-decay
  cli::FitDecayOptions fit_options;
  std::filesystem::path fit_config;
  auto* fit = app.add_subcommand("fit-decay", "fit accuracy vs uncertainty decay from samples");
  auto* fit_input = fit->add_option("--input", fit_options.input, "sample JSONL");
  fit->add_option("--config", fit_config, "JSON config (flags override)");
  auto* fit_m = fit->add_option("--m", fit_options.m, "number of equal-width bins");
  auto* fit_k = fit->add_option("--k", fit_options.k_expected, "expected samples per query");
  auto* fit_w = fit->add_flag("--unweighted", "ignore centroid counts in the fit");
  auto* fit_l = fit->add_flag("--lenient", "collect bad lines instead of failing");

  // assign-regions
  cli::AssignRegionsOptions region_options;
  std::filesystem::path region_config;
  auto* regions = app.add_subcommand("assign-regions", "build profiles and assign knowledge regions");
  auto* region_input = regions->add_option("--input", region_options.input, "sample JSONL");
  auto* region_gold = regions->add_option("--gold", region_options.gold,
                                          "gold-answer JSONL ({query_id, gold} per line)");
  regions->add_option("--config", region_config, "JSON config (flags override)");
  auto* region_floor =
      regions->add_option("--mastered-floor", region_options.thresholds.mastered_floor,
                          "accuracy at or above which a query is Mastered");
  auto* region_ceiling =
      regions->add_option("--missing-ceiling", region_options.thresholds.missing_ceiling,
                          "accuracy at or below which a query is Missing");
  auto* region_tolerance = regions->add_option(
      "--tolerance", region_options.thresholds.tolerance,
      "band widening both cuts for answer-consistent profiles");
  auto* region_veto =
      regions->add_flag("--uncertainty-veto", "demote Mastered above the Q90 uncertainty");
  auto* region_l = regions->add_flag("--lenient", "collect bad lines instead of failing");

  // metrics
  cli::MetricsOptions metrics_options;
  std::filesystem::path metrics_config;
  auto* metrics = app.add_subcommand("metrics", "cognitive decision metrics from decision JSONL");
  auto* metrics_input = metrics->add_option("--input", metrics_options.input, "decision JSONL");
  metrics->add_option("--config", metrics_config, "JSON config (flags override)");
  auto* metrics_bins = metrics->add_option("--bins", metrics_options.bins, "equal-mass ECE bins");
  auto* metrics_markers = metrics->add_option("--marker", metrics_options.markers,
                                              "abstention marker phrase (repeatable)");
  auto* metrics_l = metrics->add_flag("--lenient", "collect bad lines instead of failing");

  // ece
  cli::EceOptions ece_options;
  std::filesystem::path ece_config;
  auto* ece = app.add_subcommand("ece", "equal-mass calibration error from sample JSONL");
  auto* ece_input = ece->add_option("--input", ece_options.input, "sample JSONL");
  ece->add_option("--config", ece_config, "JSON config (flags override)");
  auto* ece_bins = ece->add_option("--bins", ece_options.bins, "equal-mass bins");
  auto* ece_l = ece->add_flag("--lenient", "collect bad lines instead of failing");

  // simulate
  cli::SimulateOptions sim_options;
  std::filesystem::path sim_config;
  std::string sim_preset;
  std::string sim_variant;
  int sim_steps = -1;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "run a GRPO/CDKC scenario and emit its trace");
  auto* sim_preset_opt = simulate->add_option("--preset", sim_preset,
                                              "bundled scenario: trap-grpo, trap-cdkc, flatten-cdkc");
  auto* sim_config_opt = simulate->add_option("--config", sim_config, "scenario config JSON");
  auto* sim_variant_opt = simulate->add_option("--variant", sim_variant, "grpo or cdkc");
  auto* sim_steps_opt = simulate->add_option("--steps", sim_steps, "override step count");
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "override rng seed");
  sim_preset_opt->excludes(sim_config_opt);

  // gen-synthetic
  cli::GenSyntheticOptions gen_options;
  std::filesystem::path gen_config;
  std::string gen_counts;
  std::string gen_accuracies;
  auto* gen = app.add_subcommand("gen-synthetic", "emit a planted-truth corpus");
  auto* gen_law = gen->add_option("--law", gen_options.law,
                                  "decay | calibrated | miscalibrated | region-mix");
  gen->add_option("--config", gen_config, "JSON config (flags override)");
  auto* gen_seed = gen->add_option("--seed", gen_options.seed, "corpus seed");
  auto* gen_n = gen->add_option("--n", gen_options.n, "queries (decay) or pairs (calibrated)");
  auto* gen_k = gen->add_option("--k", gen_options.k, "samples per query");
  auto* gen_a = gen->add_option("--a", gen_options.a, "planted decay amplitude");
  auto* gen_b = gen->add_option("--b", gen_options.b, "planted decay asymptote");
  auto* gen_gap = gen->add_option("--gap", gen_options.gap, "planted overconfidence gap");
  auto* gen_counts_opt = gen->add_option("--counts", gen_counts, "region-mix block sizes, comma separated");
  auto* gen_acc_opt =
      gen->add_option("--accuracies", gen_accuracies, "region-mix block accuracies, comma separated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::string summary;
    if (fit->parsed()) {
      if (!fit_config.empty()) fit_options.apply(load_config(fit_config));
      if (fit_input->count()) fit_options.input = fit_input->as<std::string>();
      if (fit_m->count()) fit_options.m = fit_m->as<int>();
      if (fit_k->count()) fit_options.k_expected = fit_k->as<int>();
      if (fit_w->count()) fit_options.count_weighted = false;
      if (fit_l->count()) fit_options.lenient = true;
      if (fit_options.input.empty()) {
        std::cerr << "error: fit-decay needs --input (directly or via --config)\n";
        return 1;
      }
      summary = cli::run_fit_decay(fit_options, output_dir);
    } else if (regions->parsed()) {
      if (!region_config.empty()) region_options.apply(load_config(region_config));
      if (region_input->count()) region_options.input = region_input->as<std::string>();
      if (region_gold->count()) region_options.gold = region_gold->as<std::string>();
      if (region_floor->count())
        region_options.thresholds.mastered_floor = region_floor->as<Scalar>();
      if (region_ceiling->count())
        region_options.thresholds.missing_ceiling = region_ceiling->as<Scalar>();
      if (region_tolerance->count())
        region_options.thresholds.tolerance = region_tolerance->as<Scalar>();
      if (region_veto->count()) region_options.uncertainty_veto = true;
      if (region_l->count()) region_options.lenient = true;
      if (region_options.input.empty()) {
        std::cerr << "error: assign-regions needs --input (directly or via --config)\n";
        return 1;
      }
      summary = cli::run_assign_regions(region_options, output_dir);
    } else if (metrics->parsed()) {
      if (!metrics_config.empty()) metrics_options.apply(load_config(metrics_config));
      if (metrics_input->count()) metrics_options.input = metrics_input->as<std::string>();
      if (metrics_bins->count()) metrics_options.bins = metrics_bins->as<int>();
      if (metrics_markers->count()) metrics_options.markers = metrics_markers->as<std::vector<std::string>>();
      if (metrics_l->count()) metrics_options.lenient = true;
      if (metrics_options.input.empty()) {
        std::cerr << "error: metrics needs --input (directly or via --config)\n";
        return 1;
      }
      summary = cli::run_metrics(metrics_options, output_dir);
    } else if (ece->parsed()) {
      if (!ece_config.empty()) ece_options.apply(load_config(ece_config));
      if (ece_input->count()) ece_options.input = ece_input->as<std::string>();
      if (ece_bins->count()) ece_options.bins = ece_bins->as<int>();
      if (ece_l->count()) ece_options.lenient = true;
      if (ece_options.input.empty()) {
        std::cerr << "error: ece needs --input (directly or via --config)\n";
        return 1;
      }
      summary = cli::run_ece(ece_options, output_dir);
    } else if (simulate->parsed()) {
      if (sim_preset_opt->count()) {
        sim_options.scenario = preset(sim_preset);
        sim_options.variant = preset_variant(sim_preset);
      } else if (sim_config_opt->count()) {
        sim_options.apply(load_config(sim_config));
      } else {
        {
        std::cerr << "error: simulate needs --preset or --config\n";
        return 1;
      }
      }
      if (sim_variant_opt->count()) {
        const auto parsed = variant_from_string(sim_variant);
        if (!parsed) throw InvalidInput("simulate: variant must be 'grpo' or 'cdkc'");
        sim_options.variant = *parsed;
      }
      if (sim_steps_opt->count()) sim_options.scenario.train.steps = sim_steps;
      if (sim_seed_opt->count()) sim_options.scenario.train.rng_seed = sim_seed;
      summary = cli::run_simulate(sim_options, output_dir);
    } else if (gen->parsed()) {
      if (!gen_config.empty()) gen_options.apply(load_config(gen_config));
      if (gen_law->count()) gen_options.law = gen_law->as<std::string>();
      if (gen_seed->count()) gen_options.seed = gen_seed->as<std::uint64_t>();
      if (gen_n->count()) gen_options.n = gen_n->as<int>();
      if (gen_k->count()) gen_options.k = gen_k->as<int>();
      if (gen_a->count()) gen_options.a = gen_a->as<Scalar>();
      if (gen_b->count()) gen_options.b = gen_b->as<Scalar>();
      if (gen_gap->count()) gen_options.gap = gen_gap->as<Scalar>();
      if (gen_counts_opt->count()) {
        gen_options.counts.clear();
        std::stringstream ss(gen_counts);
        for (std::string item; std::getline(ss, item, ',');)
          gen_options.counts.push_back(std::stoi(item));
      }
      if (gen_acc_opt->count()) {
        gen_options.accuracies.clear();
        std::stringstream ss(gen_accuracies);
        for (std::string item; std::getline(ss, item, ',');)
          gen_options.accuracies.push_back(std::stod(item));
      }
      summary = cli::run_gen_synthetic(gen_options, output_dir);
    }
    std::cout << summary << "\n";
    return 0;
  } catch (const NumericalError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return 1;
  }
}
