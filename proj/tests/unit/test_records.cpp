#include "reagent/cli/records.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "reagent/errors.hpp"

namespace reagent::cli {
namespace {

using nlohmann::json;

TEST(InputLine, MinimalRecord) {
  const auto r = parse_input_line(R"({"id": "a", "tokens": [1, 2, 3]})");
  EXPECT_EQ(r.id, "a");
  EXPECT_EQ(r.tokens, (std::vector<TokenId>{1, 2, 3}));
  EXPECT_FALSE(r.annotation.has_value());
  EXPECT_EQ(r.agreement_target(), 2u);
}

TEST(InputLine, AnnotatedRecord) {
  const auto r = parse_input_line(
      R"({"id": 7, "tokens": [1, 2, 3, 4, 5], "surface": ["a","b","c","d","e"],)"
      R"( "annotations": {"antecedent": [0], "distractor": [2], "rationale_length": 2, "target_pos": 3}})");
  EXPECT_EQ(r.id, "7");
  ASSERT_TRUE(r.annotation.has_value());
  EXPECT_EQ(r.annotation->antecedent_positions, std::vector<std::size_t>{0});
  EXPECT_EQ(r.agreement_target(), 3u);
}

TEST(InputLine, RejectsMalformed) {
  EXPECT_THROW(parse_input_line("{not json"), ConfigError);
  EXPECT_THROW(parse_input_line(R"({"id": "a"})"), ConfigError);
  EXPECT_THROW(parse_input_line(R"({"id": "a", "tokens": [1]})"), EmptyContextError);
  EXPECT_THROW(parse_input_line(R"({"id": "a", "tokens": [1, -2]})"), VocabularyError);
  EXPECT_THROW(parse_input_line(R"({"id": "a", "tokens": [1, 2], "surface": ["x"]})"),
               LengthMismatchError);
  EXPECT_THROW(parse_input_line(R"({"id": "a", "tokens": [1, 2, 3],)"
                                R"( "annotations": {"antecedent": [2], "rationale_length": 1}})"),
               ConfigError);
}

TEST(InputStream, CountsAndSkipsBadLines) {
  std::istringstream in(
      "{\"id\": \"a\", \"tokens\": [1, 2]}\n"
      "\n"
      "garbage\n"
      "{\"id\": \"b\", \"tokens\": [3]}\n"
      "{\"id\": \"c\", \"tokens\": [4, 5, 6]}\n");
  const auto parsed = parse_input(in);
  ASSERT_EQ(parsed.records.size(), 2u);
  EXPECT_EQ(parsed.records[1].id, "c");
  EXPECT_EQ(parsed.malformed, 2u);
  ASSERT_EQ(parsed.warnings.size(), 2u);
  EXPECT_NE(parsed.warnings[0].find("line 3"), std::string::npos);
}

TEST(Attribution, RoundTrip) {
  AttributionRecord rec;
  rec.input = parse_input_line(
      R"({"id": "x", "tokens": [4, 5, 6, 7], "annotations": {"antecedent": [0], "distractor": [1], "rationale_length": 1}})");
  rec.vocab_size = 64;
  PositionAttribution t;
  t.target_pos = 3;
  t.averaged = {{0.1, -0.2, 0.3}, {0.3, 0.2, 0.5}, 12, true};
  t.runs = {t.averaged, {{0, 0, 0}, {0.25, 0.25, 0.5}, 1000, false}};
  rec.targets.push_back(t);
  const json j = to_json(rec);
  EXPECT_EQ(j["targets"][0]["target_token"], 7);
  EXPECT_EQ(j["targets"][0]["positions"], json({0, 1, 2}));
  const auto back = parse_attribution_record(json::parse(j.dump()));
  EXPECT_EQ(back.input.tokens, rec.input.tokens);
  ASSERT_EQ(back.targets.size(), 1u);
  EXPECT_EQ(back.targets[0].averaged.scores, t.averaged.scores);
  EXPECT_EQ(back.targets[0].averaged.logits, t.averaged.logits);
  EXPECT_EQ(back.targets[0].runs.size(), 2u);
  EXPECT_FALSE(back.targets[0].runs[1].converged);
  EXPECT_TRUE(back.input.annotation.has_value());
  EXPECT_EQ(to_json(back), j);
}

TEST(Attribution, RejectsScoresNotCoveringContext) {
  json j = {{"id", "x"},
            {"tokens", {1, 2, 3}},
            {"vocab_size", 64},
            {"targets",
             {{{"target_pos", 2},
               {"scores", {1.0}},
               {"logits", {0.0}},
               {"converged", true},
               {"step_count", 0}}}}};
  EXPECT_THROW(parse_attribution_record(j), LengthMismatchError);
}

TEST(Report, RoundTripIncludingInfinities) {
  FaithfulnessReport r;
  r.per_position = {{1, 0.25, 0.5}, {6, 0.0, 1.25}};
  r.sequence_soft_ns = 0.125;
  r.sequence_soft_nc = 0.875;
  r.skipped_positions = 1;
  r.num_perturbation_samples = 30;
  r.seed = 42;
  r.random_soft_ns = 0.2;
  r.random_soft_nc = 0.0;
  r.log_ratio_vs_random =
      LogRatio{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::quiet_NaN()};
  const auto lines = report_lines("rec", r);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_TRUE(lines[1]["soft_nc_above_one"].get<bool>());
  EXPECT_TRUE(lines[2]["log_ratio_vs_random"]["soft_ns"].is_null());
  EXPECT_EQ(lines[2]["log_ratio_vs_random"]["soft_ns_flag"], "neg-inf");
  EXPECT_EQ(lines[2]["log_ratio_vs_random"]["soft_nc_flag"], "undefined");

  std::vector<json> reparsed;
  for (const auto& l : lines) reparsed.push_back(json::parse(l.dump()));
  const auto back = parse_report_lines(reparsed);
  ASSERT_EQ(back.per_position.size(), 2u);
  EXPECT_EQ(back.per_position[1].soft_nc, 1.25);
  EXPECT_EQ(back.sequence_soft_nc, 0.875);
  EXPECT_EQ(back.skipped_positions, 1u);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(*back.random_soft_ns, 0.2);
  EXPECT_TRUE(std::isinf(back.log_ratio_vs_random->soft_ns));
  EXPECT_LT(back.log_ratio_vs_random->soft_ns, 0.0);
  EXPECT_TRUE(std::isnan(back.log_ratio_vs_random->soft_nc));
}

TEST(Report, NeedsSummary) {
  const std::vector<json> lines{{{"type", "position"}, {"target_pos", 1}, {"soft_ns", 0.1}, {"soft_nc", 0.2}}};
  EXPECT_THROW(parse_report_lines(lines), EmptyReportError);
}

TEST(Agreement, LineShape) {
  const auto j = agreement_line({0.75, 0.5}, 4);
  EXPECT_EQ(j["type"], "agreement");
  EXPECT_EQ(j["ante_ratio"], 0.75);
  EXPECT_EQ(j["items"], 4);
}

}  // namespace
}  // namespace reagent::cli
