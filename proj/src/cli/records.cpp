#include "reagent/cli/records.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "reagent/errors.hpp"

namespace reagent::cli {

using nlohmann::json;

std::size_t InputRecord::agreement_target() const {
  return annotation_target.value_or(tokens.size() - 1);
}

namespace {

void validate_input(const InputRecord& r) {
  if (r.id.empty()) throw ConfigError("record id is empty");
  if (r.tokens.size() < 2) throw EmptyContextError("record needs at least two tokens");
  for (TokenId t : r.tokens) {
    if (t < 0) throw VocabularyError("negative token id");
  }
  if (!r.surface.empty() && r.surface.size() != r.tokens.size()) {
    throw LengthMismatchError("surface strings must align with tokens");
  }
  if (r.annotation) {
    const std::size_t target = r.agreement_target();
    if (target < 1 || target >= r.tokens.size()) {
      throw ConfigError("annotation target outside sequence");
    }
    r.annotation->validate(target);
  }
}

json annotation_json(const InputRecord& r) {
  json a = {{"antecedent", r.annotation->antecedent_positions},
            {"distractor", r.annotation->distractor_positions},
            {"rationale_length", r.annotation->rationale_length}};
  if (r.annotation_target) a["target_pos"] = *r.annotation_target;
  return a;
}

void read_annotation(const json& j, InputRecord& r) {
  if (!j.contains("annotations") || j.at("annotations").is_null()) return;
  const auto& a = j.at("annotations");
  AgreementAnnotation ann;
  ann.antecedent_positions = a.value("antecedent", std::vector<std::size_t>{});
  ann.distractor_positions = a.value("distractor", std::vector<std::size_t>{});
  ann.rationale_length = a.at("rationale_length").get<std::size_t>();
  r.annotation = std::move(ann);
  if (a.contains("target_pos")) r.annotation_target = a.at("target_pos").get<std::size_t>();
}

InputRecord read_input_fields(const json& j) {
  if (!j.is_object()) throw ConfigError("record is not a JSON object");
  InputRecord r;
  const auto& id = j.at("id");
  r.id = id.is_string() ? id.get<std::string>() : id.dump();
  r.tokens = j.at("tokens").get<std::vector<TokenId>>();
  r.surface = j.value("surface", std::vector<std::string>{});
  read_annotation(j, r);
  return r;
}

// JSON has no infinities; they are written as null plus a flag.
void put_ratio(json& j, const char* key, double value) {
  if (std::isnan(value)) {
    j[key] = nullptr;
    j[std::string(key) + "_flag"] = "undefined";
  } else if (std::isinf(value)) {
    j[key] = nullptr;
    j[std::string(key) + "_flag"] = value < 0 ? "neg-inf" : "pos-inf";
  } else {
    j[key] = value;
  }
}

double get_ratio(const json& j, const char* key) {
  if (!j.at(key).is_null()) return j.at(key).get<double>();
  const std::string flag = j.value(std::string(key) + "_flag", std::string("undefined"));
  if (flag == "neg-inf") return -std::numeric_limits<double>::infinity();
  if (flag == "pos-inf") return std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

InputRecord parse_input_line(const std::string& line) {
  InputRecord r;
  try {
    r = read_input_fields(json::parse(line));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed record: ") + e.what());
  }
  validate_input(r);
  return r;
}

ParsedInput parse_input(std::istream& in) {
  ParsedInput out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.records.push_back(parse_input_line(line));
    } catch (const std::exception& e) {
      ++out.malformed;
      out.warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

json to_json(const ImportanceState& state) {
  std::vector<std::size_t> positions(state.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  return {{"positions", positions},
          {"scores", state.scores},
          {"logits", state.logits},
          {"converged", state.converged},
          {"step_count", state.step_count}};
}

ImportanceState importance_from_json(const json& j) {
  ImportanceState s;
  s.scores = j.at("scores").get<std::vector<double>>();
  s.logits = j.at("logits").get<std::vector<double>>();
  s.converged = j.at("converged").get<bool>();
  s.step_count = j.at("step_count").get<std::size_t>();
  if (s.scores.size() != s.logits.size()) throw LengthMismatchError("scores/logits mismatch");
  return s;
}

json to_json(const AttributionRecord& record) {
  json targets = json::array();
  for (const auto& t : record.targets) {
    json entry = to_json(t.averaged);
    entry["target_pos"] = t.target_pos;
    entry["target_token"] = record.input.tokens.at(t.target_pos);
    json runs = json::array();
    for (const auto& r : t.runs) runs.push_back(to_json(r));
    entry["runs"] = std::move(runs);
    targets.push_back(std::move(entry));
  }
  json j = {{"id", record.input.id},
            {"tokens", record.input.tokens},
            {"vocab_size", record.vocab_size},
            {"targets", std::move(targets)}};
  if (!record.input.surface.empty()) j["surface"] = record.input.surface;
  if (record.input.annotation) j["annotations"] = annotation_json(record.input);
  return j;
}

AttributionRecord parse_attribution_record(const json& j) {
  AttributionRecord record;
  record.input = read_input_fields(j);
  validate_input(record.input);
  record.vocab_size = j.at("vocab_size").get<std::size_t>();
  for (const auto& entry : j.at("targets")) {
    PositionAttribution t;
    t.target_pos = entry.at("target_pos").get<std::size_t>();
    if (t.target_pos < 1 || t.target_pos >= record.input.tokens.size()) {
      throw ConfigError("attribution target outside sequence");
    }
    t.averaged = importance_from_json(entry);
    if (t.averaged.size() != t.target_pos) {
      throw LengthMismatchError("attribution does not cover its context");
    }
    for (const auto& r : entry.value("runs", json::array())) {
      t.runs.push_back(importance_from_json(r));
    }
    record.targets.push_back(std::move(t));
  }
  return record;
}

std::vector<json> report_lines(const std::string& id, const FaithfulnessReport& report) {
  std::vector<json> lines;
  for (const auto& p : report.per_position) {
    lines.push_back({{"type", "position"},
                     {"id", id},
                     {"target_pos", p.target_pos},
                     {"soft_ns", p.soft_ns},
                     {"soft_nc", p.soft_nc},
                     {"soft_nc_above_one", p.soft_nc > 1.0}});
  }
  json summary = {{"type", "sequence"},
                  {"id", id},
                  {"sequence_soft_ns", report.sequence_soft_ns},
                  {"sequence_soft_nc", report.sequence_soft_nc},
                  {"evaluated_positions", report.per_position.size()},
                  {"skipped_positions", report.skipped_positions},
                  {"num_perturbation_samples", report.num_perturbation_samples},
                  {"seed", report.seed},
                  {"soft_nc_above_one", report.soft_nc_exceeds_one()}};
  if (report.random_soft_ns) summary["random_soft_ns"] = *report.random_soft_ns;
  if (report.random_soft_nc) summary["random_soft_nc"] = *report.random_soft_nc;
  if (report.log_ratio_vs_random) {
    json ratio = json::object();
    put_ratio(ratio, "soft_ns", report.log_ratio_vs_random->soft_ns);
    put_ratio(ratio, "soft_nc", report.log_ratio_vs_random->soft_nc);
    summary["log_ratio_vs_random"] = std::move(ratio);
  }
  lines.push_back(std::move(summary));
  return lines;
}

FaithfulnessReport parse_report_lines(std::span<const json> lines) {
  FaithfulnessReport report;
  bool have_summary = false;
  for (const auto& line : lines) {
    const std::string type = line.at("type").get<std::string>();
    if (type == "position") {
      report.per_position.push_back({line.at("target_pos").get<std::size_t>(),
                                     line.at("soft_ns").get<double>(),
                                     line.at("soft_nc").get<double>()});
    } else if (type == "sequence") {
      have_summary = true;
      report.sequence_soft_ns = line.at("sequence_soft_ns").get<double>();
      report.sequence_soft_nc = line.at("sequence_soft_nc").get<double>();
      report.skipped_positions = line.at("skipped_positions").get<std::size_t>();
      report.num_perturbation_samples = line.at("num_perturbation_samples").get<std::size_t>();
      report.seed = line.at("seed").get<std::uint64_t>();
      if (line.contains("random_soft_ns")) report.random_soft_ns = line.at("random_soft_ns").get<double>();
      if (line.contains("random_soft_nc")) report.random_soft_nc = line.at("random_soft_nc").get<double>();
      if (line.contains("log_ratio_vs_random")) {
        const auto& r = line.at("log_ratio_vs_random");
        report.log_ratio_vs_random = LogRatio{get_ratio(r, "soft_ns"), get_ratio(r, "soft_nc")};
      }
    }
  }
  if (!have_summary) throw EmptyReportError("report has no sequence summary");
  return report;
}

json agreement_line(const AgreementRatios& ratios, std::size_t items) {
  return {{"type", "agreement"},
          {"ante_ratio", ratios.ante_ratio},
          {"no_d_ratio", ratios.no_d_ratio},
          {"items", items}};
}

}  // namespace reagent::cli
