#pragma once

// Line-delimited JSON records read and written by the command-line tool.
//
// Input, one per line:
//   {"id": str, "tokens": [int...], "surface": [str...]?,
//    "annotations": {"antecedent": [int...], "distractor": [int...],
//                    "rationale_length": int, "target_pos": int?}?}
//
// Attribution output, one per input record:
//   {"id", "tokens", "surface"?, "annotations"?, "vocab_size",
//    "targets": [{"target_pos", "target_token", "positions", "scores",
//                 "logits", "converged", "step_count", "runs": [...]}]}
//
// Report output, per record: one {"type": "position", ...} line per
// evaluated target followed by one {"type": "sequence", ...} summary.
// A final {"type": "agreement", ...} line is written when any record is
// annotated.

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reagent/core/importance.hpp"
#include "reagent/core/reagent.hpp"
#include "reagent/eval/agreement.hpp"
#include "reagent/eval/faithfulness.hpp"
#include "reagent/types.hpp"

namespace reagent::cli {

struct InputRecord {
  std::string id;
  std::vector<TokenId> tokens;
  std::vector<std::string> surface;
  std::optional<AgreementAnnotation> annotation;
  /// Position whose rationale is scored against the annotation; defaults to
  /// the last token.
  std::optional<std::size_t> annotation_target;

  std::size_t agreement_target() const;
};

/// Throws on anything malformed (bad JSON, missing fields, < 2 tokens,
/// negative ids, inconsistent annotation).
InputRecord parse_input_line(const std::string& line);

struct ParsedInput {
  std::vector<InputRecord> records;
  std::vector<std::string> warnings;
  std::size_t malformed = 0;
};

/// Never throws on bad lines: they are counted and described in `warnings`.
/// Blank lines are ignored.
ParsedInput parse_input(std::istream& in);

nlohmann::json to_json(const ImportanceState& state);
ImportanceState importance_from_json(const nlohmann::json& j);

struct AttributionRecord {
  InputRecord input;
  std::size_t vocab_size = 0;
  std::vector<PositionAttribution> targets;
};

nlohmann::json to_json(const AttributionRecord& record);
AttributionRecord parse_attribution_record(const nlohmann::json& j);

std::vector<nlohmann::json> report_lines(const std::string& id, const FaithfulnessReport& report);
/// Inverse of report_lines for one record.
FaithfulnessReport parse_report_lines(std::span<const nlohmann::json> lines);

nlohmann::json agreement_line(const AgreementRatios& ratios, std::size_t items);

}  // namespace reagent::cli
