// SPDX-License-Identifier: Apache-2.0
#include "metacog/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "metacog/errors.hpp"

namespace metacog {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidInput(std::string("missing key '") + key + "'");
  return *it;
}

Scalar require_number(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw InvalidInput(std::string("key '") + key + "' must be a number");
  return v.get<Scalar>();
}

bool require_bool(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_boolean()) throw InvalidInput(std::string("key '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw InvalidInput(std::string("key '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

ResponseSample sample_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("sample line is not a JSON object");

  ResponseSample sample;
  sample.query_id = require_string(j, "query_id");

  const json& sid = require(j, "sample_id");
  if (!sid.is_number_integer()) throw InvalidInput("key 'sample_id' must be an integer");
  sample.sample_id = sid.get<int>();

  const json& lps = require(j, "token_logprobs");
  if (!lps.is_array()) throw InvalidInput("key 'token_logprobs' must be an array");
  sample.token_logprobs.reserve(lps.size());
  for (const json& v : lps) {
    if (!v.is_number()) throw InvalidInput("token_logprobs entries must be numbers");
    sample.token_logprobs.push_back(v.get<Scalar>());
  }

  sample.correct = require_bool(j, "correct");

  if (const auto it = j.find("answer"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw InvalidInput("key 'answer' must be a string");
    sample.answer_text = it->get<std::string>();
  }

  if (const auto it = j.find("step_distributions"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw InvalidInput("key 'step_distributions' must be an array");
    const auto rows = static_cast<Index>(it->size());
    Index cols = -1;
    Matrix d;
    for (Index t = 0; t < rows; ++t) {
      const json& row = (*it)[static_cast<std::size_t>(t)];
      if (!row.is_array()) throw InvalidInput("step_distributions rows must be arrays");
      if (cols < 0) {
        cols = static_cast<Index>(row.size());
        d.resize(rows, cols);
      }
      if (static_cast<Index>(row.size()) != cols)
        throw InvalidInput("step_distributions rows differ in length");
      for (Index v = 0; v < cols; ++v) {
        const json& p = row[static_cast<std::size_t>(v)];
        if (!p.is_number()) throw InvalidInput("step_distributions entries must be numbers");
        d(t, v) = p.get<Scalar>();
      }
    }
    if (rows > 0) sample.step_distributions = std::move(d);
  }

  validate(sample);
  return sample;
}

json to_json(const ResponseSample& sample) {
  json j;
  j["query_id"] = sample.query_id;
  j["sample_id"] = sample.sample_id;
  j["token_logprobs"] = sample.token_logprobs;
  j["correct"] = sample.correct;
  if (sample.answer_text) j["answer"] = *sample.answer_text;
  if (sample.step_distributions) {
    json rows = json::array();
    for (Index t = 0; t < sample.step_distributions->rows(); ++t) {
      json row = json::array();
      for (Index v = 0; v < sample.step_distributions->cols(); ++v)
        row.push_back((*sample.step_distributions)(t, v));
      rows.push_back(std::move(row));
    }
    j["step_distributions"] = std::move(rows);
  }
  return j;
}

DecisionRecord decision_from_json(const json& j, std::span<const std::string> markers) {
  if (!j.is_object()) throw InvalidInput("decision line is not a JSON object");

  DecisionRecord record;
  record.query_id = require_string(j, "query_id");
  record.answerable = require_bool(j, "answerable");

  if (const auto it = j.find("abstained"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw InvalidInput("key 'abstained' must be a boolean");
    record.abstained = it->get<bool>();
  } else if (const auto answer = j.find("answer"); answer != j.end() && answer->is_string()) {
    record.abstained = is_abstention(answer->get<std::string>(), markers);
  } else {
    throw InvalidInput("decision needs either 'abstained' or an 'answer' string");
  }

  if (const auto it = j.find("correct"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw InvalidInput("key 'correct' must be a boolean");
    record.correct = it->get<bool>();
  }
  if (const auto it = j.find("uncertainty"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw InvalidInput("key 'uncertainty' must be a number");
    record.uncertainty = it->get<Scalar>();
  }

  validate(record);
  return record;
}

json to_json(const DecisionRecord& record) {
  json j;
  j["query_id"] = record.query_id;
  j["answerable"] = record.answerable;
  j["abstained"] = record.abstained;
  if (record.correct) j["correct"] = *record.correct;
  if (record.uncertainty) j["uncertainty"] = *record.uncertainty;
  return j;
}

namespace {

template <typename Record, typename Parser>
std::pair<std::vector<Record>, IngestReport> ingest_lines(const std::filesystem::path& path,
                                                          IngestMode mode, Parser parse) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<Record> records;
  IngestReport report;
  std::string line;
  while (std::getline(in, line)) {
    ++report.lines_read;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;  // blank separator
    const auto reject = [&](const std::string& what) {
      ++report.rejected;
      const std::string message = "line " + std::to_string(report.lines_read) + ": " + what;
      if (mode == IngestMode::Strict) throw InvalidInput(message);
      report.issues.push_back({report.lines_read, message});
    };
    try {
      json j = json::parse(line);
      records.push_back(parse(j));
      ++report.accepted;
    } catch (const json::exception& err) {
      reject(err.what());
    } catch (const InvalidInput& err) {
      reject(err.what());
    }
  }
  if (report.accepted == 0) throw EmptyInput("no valid records in " + path.string());
  return {std::move(records), std::move(report)};
}

}  // namespace

std::pair<std::vector<ResponseSample>, IngestReport> ingest_samples(
    const std::filesystem::path& path, IngestMode mode) {
  return ingest_lines<ResponseSample>(path, mode,
                                      [](const json& j) { return sample_from_json(j); });
}

std::pair<std::vector<DecisionRecord>, IngestReport> ingest_decisions(
    const std::filesystem::path& path, IngestMode mode,
    std::span<const std::string> markers) {
  return ingest_lines<DecisionRecord>(
      path, mode, [markers](const json& j) { return decision_from_json(j, markers); });
}

std::pair<std::vector<GoldAnswer>, IngestReport> ingest_gold_answers(
    const std::filesystem::path& path, IngestMode mode) {
  return ingest_lines<GoldAnswer>(path, mode, [](const json& j) {
    if (!j.is_object()) throw InvalidInput("gold line is not a JSON object");
    GoldAnswer gold{require_string(j, "query_id"), require_string(j, "gold")};
    if (gold.gold.empty()) throw InvalidInput("gold answer is empty");
    return gold;
  });
}

std::string format_double(Scalar value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_samples_jsonl(const std::filesystem::path& path,
                         std::span<const ResponseSample> samples) {
  std::ostringstream out;
  for (const ResponseSample& sample : samples) out << to_json(sample).dump() << '\n';
  write_text_file(path, out.str());
}

json to_json(const ScenarioConfig& config) {
  json j;
  j["name"] = config.name;
  j["vocab_size"] = config.shape.vocab_size;
  j["horizon"] = config.shape.horizon;
  j["memory"] = config.shape.memory;
  j["group_size"] = config.train.group_size;
  j["clip_epsilon"] = config.train.clip_epsilon;
  j["lambda1"] = config.train.lambda1;
  j["lambda2"] = config.train.lambda2;
  j["learning_rate"] = config.train.learning_rate;
  j["steps"] = config.train.steps;
  j["advantage_delta"] = config.train.advantage_delta;
  j["seed"] = config.train.rng_seed;
  j["env"] = {{"p_ref_refusal", config.env.p_ref_refusal},
              {"refusal_token", config.env.refusal_token},
              {"gold_token", config.env.gold_token},
              {"solvable", config.env.solvable},
              {"policy_init_blend", config.env.policy_init_blend}};
  j["gold_rarity_factor"] = config.gold_rarity_factor;
  j["gold_escape_threshold"] = config.gold_escape_threshold;
  j["trap_gold_factor"] = config.trap_gold_factor;
  j["refusal_ceiling"] = config.refusal_ceiling;
  j["flatten_entropy_fraction"] = config.flatten_entropy_fraction;
  return j;
}

ScenarioConfig scenario_config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("scenario config is not a JSON object");
  ScenarioConfig config;
  config.name = j.value("name", std::string("custom"));
  config.shape.vocab_size = static_cast<int>(require_number(j, "vocab_size"));
  config.shape.horizon = static_cast<int>(require_number(j, "horizon"));
  config.shape.memory = static_cast<int>(j.value("memory", 0));
  config.train.group_size = static_cast<int>(require_number(j, "group_size"));
  config.train.clip_epsilon = j.value("clip_epsilon", config.train.clip_epsilon);
  config.train.lambda1 = j.value("lambda1", config.train.lambda1);
  config.train.lambda2 = j.value("lambda2", config.train.lambda2);
  config.train.learning_rate = require_number(j, "learning_rate");
  config.train.steps = static_cast<int>(require_number(j, "steps"));
  config.train.advantage_delta = j.value("advantage_delta", config.train.advantage_delta);
  config.train.rng_seed = j.value("seed", std::uint64_t{1});
  if (const auto it = j.find("env"); it != j.end()) {
    const json& e = *it;
    config.env.p_ref_refusal = e.value("p_ref_refusal", config.env.p_ref_refusal);
    config.env.refusal_token = e.value("refusal_token", config.env.refusal_token);
    config.env.gold_token = e.value("gold_token", config.env.gold_token);
    config.env.solvable = e.value("solvable", config.env.solvable);
    config.env.policy_init_blend = e.value("policy_init_blend", config.env.policy_init_blend);
  }
  config.gold_rarity_factor = j.value("gold_rarity_factor", config.gold_rarity_factor);
  config.gold_escape_threshold = j.value("gold_escape_threshold", config.gold_escape_threshold);
  config.trap_gold_factor = j.value("trap_gold_factor", config.trap_gold_factor);
  config.refusal_ceiling = j.value("refusal_ceiling", config.refusal_ceiling);
  config.flatten_entropy_fraction =
      j.value("flatten_entropy_fraction", config.flatten_entropy_fraction);
  return config;
}

std::string trace_csv(const ScenarioTrace& trace) {
  std::ostringstream out;
  out << "step,loss_pg,loss_kl,loss_cal,p_gold,p_refusal,"
         "mean_entropy_correct,mean_entropy_incorrect,escape_lhs,escape_rhs\n";
  for (const ScenarioStep& s : trace.steps) {
    out << s.step << ',' << format_double(s.loss_pg) << ',' << format_double(s.loss_kl) << ','
        << format_double(s.loss_cal) << ',' << format_double(s.p_gold) << ','
        << format_double(s.p_refusal) << ',' << format_double(s.mean_entropy_correct) << ','
        << format_double(s.mean_entropy_incorrect) << ',' << format_double(s.escape_lhs) << ','
        << format_double(s.escape_rhs) << '\n';
  }
  return out.str();
}

}  // namespace metacog
