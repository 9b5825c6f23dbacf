#include "reagent/core/importance.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "reagent/errors.hpp"

namespace reagent {
namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

ImportanceState state_from_logits(std::vector<double> logits) {
  ImportanceState s;
  s.scores = softmax(logits);
  s.logits = std::move(logits);
  return s;
}

TEST(InitImportance, SameSeedSameState) {
  const auto a = init_importance(3, std::uint64_t{42});
  const auto b = init_importance(3, std::uint64_t{42});
  EXPECT_EQ(a.logits, b.logits);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.step_count, 0u);
  EXPECT_FALSE(a.converged);
}

TEST(InitImportance, SinglePositionIsCertain) {
  const auto s = init_importance(1, std::uint64_t{9});
  ASSERT_EQ(s.scores.size(), 1u);
  EXPECT_DOUBLE_EQ(s.scores[0], 1.0);
}

TEST(InitImportance, ScoresOnSimplexAndLogitsInRange) {
  const auto s = init_importance(4, std::uint64_t{7});
  for (double v : s.scores) EXPECT_GT(v, 0.0);
  EXPECT_NEAR(sum(s.scores), 1.0, 1e-12);
  for (double l : s.logits) {
    EXPECT_GE(l, -1.0);
    EXPECT_LE(l, 1.0);
  }
}

TEST(InitImportance, EmptyContextRejected) {
  EXPECT_THROW(init_importance(0, std::uint64_t{1}), EmptyContextError);
}

TEST(SelectReplacementSet, ThirtyPercentOfTen) {
  const auto r = select_replacement_set(10, 0.3, std::uint64_t{5});
  ASSERT_EQ(r.positions.size(), 3u);
  const std::set<std::size_t> distinct(r.positions.begin(), r.positions.end());
  EXPECT_EQ(distinct.size(), 3u);
  for (auto p : r.positions) EXPECT_LT(p, 10u);
}

TEST(SelectReplacementSet, ShortContextStillReplacesOne) {
  EXPECT_EQ(select_replacement_set(2, 0.3, std::uint64_t{1}).positions.size(), 1u);
}

TEST(SelectReplacementSet, FullRatioTakesEverything) {
  const auto r = select_replacement_set(5, 1.0, std::uint64_t{3});
  EXPECT_EQ(r.positions, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(SelectReplacementSet, RatioOutsideUnitIntervalRejected) {
  EXPECT_THROW(select_replacement_set(5, 0.0, std::uint64_t{3}), ConfigError);
  EXPECT_THROW(select_replacement_set(5, 1.5, std::uint64_t{3}), ConfigError);
  EXPECT_THROW(select_replacement_set(5, -0.2, std::uint64_t{3}), ConfigError);
}

TEST(SelectReplacementSet, FreshDrawsFromOneStream) {
  Rng rng(11);
  std::set<std::vector<std::size_t>> seen;
  for (int i = 0; i < 20; ++i) seen.insert(select_replacement_set(12, 0.3, rng).positions);
  EXPECT_GT(seen.size(), 1u);
}

TEST(SelectReplacementSet, RoughlyUniformOverPositions) {
  Rng rng(2024);
  std::vector<int> hits(10, 0);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    for (auto p : select_replacement_set(10, 0.3, rng).positions) ++hits[p];
  }
  // Each position is chosen with probability 0.3.
  for (int h : hits) EXPECT_NEAR(h / static_cast<double>(draws), 0.3, 0.02);
}

TEST(UpdateScores, ZeroDeltaIsNeutral) {
  const auto s = state_from_logits({0.3, -0.2, 0.9, 0.0});
  ReplacementSet r{{0, 2}, 0.5};
  const auto next = update_scores(s, 0.0, r, 1e-4);
  EXPECT_EQ(next.logits, s.logits);
  EXPECT_EQ(next.scores, s.scores);
  EXPECT_EQ(next.step_count, 1u);
}

TEST(UpdateScores, IncrementVectorMatchesHandValue) {
  const auto s = state_from_logits({0.0, 0.0, 0.0, 0.0});
  ReplacementSet r{{0, 2}, 0.5};
  const auto next = update_scores(s, 0.2, r, 1e-4);
  const double inc = 0.4054651081081642;  // ln(0.6 / 0.4)
  EXPECT_NEAR(next.logits[0], inc, 1e-12);
  EXPECT_NEAR(next.logits[1], -inc, 1e-12);
  EXPECT_NEAR(next.logits[2], inc, 1e-12);
  EXPECT_NEAR(next.logits[3], -inc, 1e-12);
}

TEST(UpdateScores, FullDeltaIsClampedAndFinite) {
  const double inc = logit_increment(1.0, 1e-4);
  EXPECT_TRUE(std::isfinite(inc));
  EXPECT_NEAR(inc, 9.21024036697585, 1e-9);  // ln(0.9999 / 0.0001)
  EXPECT_NEAR(logit_increment(-1.0, 1e-4), -9.21024036697585, 1e-9);
}

TEST(UpdateScores, IncrementIsExactlyOdd) {
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const double d = 2.0 * uniform01(rng) - 1.0;
    EXPECT_EQ(logit_increment(d, 1e-4), -logit_increment(-d, 1e-4));
  }
}

TEST(UpdateScores, PositiveDeltaRaisesReplacedRatios) {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 20);
    const auto s = init_importance(n, rng);
    const auto r = select_replacement_set(n, 0.3, rng);
    if (r.positions.size() == n) continue;
    const double delta = 1e-3 + 0.99 * uniform01(rng);
    const auto next = update_scores(s, delta, r, 1e-4);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!r.contains(i) || r.contains(j)) continue;
        EXPECT_GT(next.scores[i] / next.scores[j], s.scores[i] / s.scores[j]);
      }
    }
  }
}

TEST(UpdateScores, SimplexSurvivesLongRandomWalks) {
  Rng rng(99);
  auto s = init_importance(16, rng);
  for (int step = 0; step < 3000; ++step) {
    const auto r = select_replacement_set(16, 0.3, rng);
    s = update_scores(s, 2.0 * uniform01(rng) - 1.0, r, 1e-4);
    double total = 0.0;
    for (double v : s.scores) {
      ASSERT_GE(v, 0.0);
      total += v;
    }
    ASSERT_NEAR(total, 1.0, 1e-9);
  }
  EXPECT_EQ(s.step_count, 3000u);
}

TEST(AverageRuns, IdenticalStatesAverageToThemselves) {
  auto s = state_from_logits({0.1, 0.5, -0.3});
  s.converged = true;
  const std::vector<ImportanceState> runs{s, s, s};
  const auto avg = average_runs(runs);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(avg.scores[i], s.scores[i], 1e-15);
  EXPECT_TRUE(avg.converged);
}

TEST(AverageRuns, SymmetricPair) {
  ImportanceState a{{0, 0}, {1.0, 0.0}, 3, true};
  ImportanceState b{{0, 0}, {0.0, 1.0}, 5, true};
  const std::vector<ImportanceState> runs{a, b};
  const auto avg = average_runs(runs);
  EXPECT_DOUBLE_EQ(avg.scores[0], 0.5);
  EXPECT_DOUBLE_EQ(avg.scores[1], 0.5);
}

TEST(AverageRuns, NonConvergedRunsExcludedWhenOthersConverged) {
  ImportanceState a{{}, {0.6, 0.4}, 3, true};
  ImportanceState b{{}, {0.2, 0.8}, 5, true};
  ImportanceState stuck{{}, {1.0, 0.0}, 1000, false};
  const std::vector<ImportanceState> runs{a, stuck, b};
  const auto avg = average_runs(runs);
  EXPECT_NEAR(avg.scores[0], 0.4, 1e-15);
  EXPECT_NEAR(avg.scores[1], 0.6, 1e-15);
  EXPECT_TRUE(avg.converged);
}

TEST(AverageRuns, AllStuckAveragesEverythingAndFlags) {
  ImportanceState a{{}, {0.6, 0.4}, 1000, false};
  ImportanceState b{{}, {0.2, 0.8}, 1000, false};
  const std::vector<ImportanceState> runs{a, b};
  const auto avg = average_runs(runs);
  EXPECT_NEAR(avg.scores[0], 0.4, 1e-15);
  EXPECT_FALSE(avg.converged);
}

TEST(AverageRuns, EmptyAndRaggedRejected) {
  EXPECT_THROW(average_runs({}), Error);
  ImportanceState a{{}, {0.5, 0.5}, 0, true};
  ImportanceState b{{}, {1.0}, 0, true};
  const std::vector<ImportanceState> runs{a, b};
  EXPECT_THROW(average_runs(runs), LengthMismatchError);
}

TEST(ConfigValidation, Ranges) {
  ReAGentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.replace_ratio = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.stop_replace_fraction = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.tolerance_k = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.logit_clamp_epsilon = 0.5;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ConfigValidation, StopCountIsFlooredFraction) {
  ReAGentConfig cfg;
  EXPECT_EQ(cfg.stop_count(10), 7u);
  EXPECT_EQ(cfg.stop_count(8), 5u);
  EXPECT_EQ(cfg.stop_count(1), 0u);
  cfg.stop_replace_count = 5;
  EXPECT_EQ(cfg.stop_count(10), 5u);
  EXPECT_EQ(cfg.stop_count(3), 3u);
}

TEST(Ordering, LowestBreaksTiesByIndex) {
  const std::vector<double> scores{0.2, 0.1, 0.2, 0.1, 0.4};
  EXPECT_EQ(lowest_positions(scores, 3), (std::vector<std::size_t>{1, 3, 0}));
  EXPECT_EQ(highest_positions(scores, 2), (std::vector<std::size_t>{4, 0}));
}

}  // namespace
}  // namespace reagent
