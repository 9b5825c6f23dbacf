#include "reagent/backend/proposer.hpp"

#include <gtest/gtest.h>

#include <set>

#include "reagent/errors.hpp"

namespace reagent {
namespace {

class OutOfVocabFill : public FillSource {
 public:
  std::map<std::size_t, TokenId> fill(std::span<const TokenId>, std::span<const std::size_t> positions,
                                      double, Rng&) const override {
    std::map<std::size_t, TokenId> out;
    for (auto p : positions) out[p] = 999;
    return out;
  }
};

TEST(Strategy, NamesRoundTrip) {
  for (auto s : {ReplacementStrategy::kMaskedLm, ReplacementStrategy::kRandomVocab,
                 ReplacementStrategy::kPosMatched}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_THROW(parse_strategy("bert"), ConfigError);
}

TEST(ApplyProposal, OverwritesOnlyReplacedPositions) {
  const std::vector<TokenId> ctx{1, 2, 3, 4};
  ReplacementSet r{{1, 3}, 0.5};
  ReplacementProposal p;
  p.substitutions = {{1, 9}, {3, 8}};
  EXPECT_EQ(apply_proposal(ctx, r, p, 10), (std::vector<TokenId>{1, 9, 3, 8}));
}

TEST(ApplyProposal, RejectsMalformedProposals) {
  const std::vector<TokenId> ctx{1, 2, 3, 4};
  ReplacementSet r{{1, 3}, 0.5};
  ReplacementProposal missing;
  missing.substitutions = {{1, 9}};
  EXPECT_THROW(apply_proposal(ctx, r, missing, 10), MalformedProposalError);
  ReplacementProposal oov;
  oov.substitutions = {{1, 9}, {3, 10}};
  EXPECT_THROW(apply_proposal(ctx, r, oov, 10), MalformedProposalError);
  ReplacementProposal negative;
  negative.substitutions = {{1, 9}, {3, -1}};
  EXPECT_THROW(apply_proposal(ctx, r, negative, 10), MalformedProposalError);
}

TEST(RandomVocab, CoversExactlyTheSetAndStaysInVocab) {
  const RandomVocabProposer proposer(16);
  const std::vector<TokenId> ctx{1, 2, 3, 4, 5, 6};
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto r = select_replacement_set(ctx.size(), 0.5, rng);
    const auto p = proposer.propose(ctx, r, rng);
    ASSERT_EQ(p.substitutions.size(), r.positions.size());
    for (auto pos : r.positions) {
      ASSERT_TRUE(p.substitutions.count(pos));
      ASSERT_GE(p.substitutions.at(pos), 0);
      ASSERT_LT(p.substitutions.at(pos), 16);
    }
  }
}

TEST(MaskedLm, GreedyFillIsDeterministicAndAvoidsBanned) {
  auto fill = std::make_shared<ToyFillModel>(32, 5, std::vector<TokenId>{0, 1, 2});
  const MaskedLmProposer proposer(fill);
  const std::vector<TokenId> ctx{7, 8, 9, 10, 11};
  ReplacementSet r{{1, 2, 4}, 0.6};
  Rng a(1), b(2);
  const auto pa = proposer.propose(ctx, r, a);
  const auto pb = proposer.propose(ctx, r, b);
  EXPECT_EQ(pa.substitutions, pb.substitutions);
  for (const auto& [pos, tok] : pa.substitutions) EXPECT_GT(tok, 2);
}

TEST(MaskedLm, SampledFillNeverProducesBanned) {
  auto fill = std::make_shared<ToyFillModel>(8, 5, std::vector<TokenId>{0, 1, 2, 3});
  const MaskedLmProposer proposer(fill, 5.0);
  const std::vector<TokenId> ctx{4, 5, 6, 7};
  ReplacementSet r{{0, 1, 2, 3}, 1.0};
  Rng rng(11);
  std::set<TokenId> seen;
  for (int i = 0; i < 300; ++i) {
    for (const auto& [pos, tok] : proposer.propose(ctx, r, rng).substitutions) {
      ASSERT_GE(tok, 4);
      seen.insert(tok);
    }
  }
  EXPECT_GT(seen.size(), 1u);
}

TEST(MaskedLm, NeighboursDriveTheFill) {
  const ToyFillModel fill(64, 1);
  EXPECT_EQ(fill.slot_scores(3, 4), fill.slot_scores(3, 4));
  EXPECT_NE(fill.slot_scores(3, 4), fill.slot_scores(4, 3));
}

TEST(MaskedLm, OutOfVocabularyFillIsCaughtOnApply) {
  const MaskedLmProposer proposer(std::make_shared<OutOfVocabFill>());
  const std::vector<TokenId> ctx{1, 2, 3};
  ReplacementSet r{{1}, 0.3};
  Rng rng(0);
  const auto p = proposer.propose(ctx, r, rng);
  EXPECT_THROW(apply_proposal(ctx, r, p, 64), MalformedProposalError);
}

TEST(MaskedLm, MissingSourceIsUnavailable) {
  EXPECT_THROW(MaskedLmProposer(nullptr), StrategyUnavailableError);
  EXPECT_THROW(ToyFillModel(3, 0, {0, 1, 2}), ConfigError);
}

TEST(PosMatched, KeepsTheTagClass) {
  const auto table = PosTagTable::toy(64, 2, 8);
  const PosMatchedProposer proposer(table);
  const std::vector<TokenId> ctx{3, 14, 15, 9, 26, 53};
  ReplacementSet r{{0, 1, 2, 3, 4, 5}, 1.0};
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto p = proposer.propose(ctx, r, rng);
    for (const auto& [pos, tok] : p.substitutions) {
      ASSERT_EQ(table.tag_of[static_cast<std::size_t>(tok)],
                table.tag_of[static_cast<std::size_t>(ctx[pos])]);
    }
  }
}

TEST(PosMatched, SingletonClassIsFlaggedDegenerate) {
  PosTagTable table;
  table.tag_of = {0, 1, 1, 1};
  const PosMatchedProposer proposer(table);
  const std::vector<TokenId> ctx{0, 2};
  ReplacementSet r{{0}, 0.5};
  Rng rng(0);
  const auto p = proposer.propose(ctx, r, rng);
  EXPECT_TRUE(p.degenerate);
  EXPECT_EQ(p.substitutions.at(0), 0);
}

TEST(PosTagTable, ToyIsDeterministicAndInRange) {
  const auto a = PosTagTable::toy(50, 9, 5);
  const auto b = PosTagTable::toy(50, 9, 5);
  EXPECT_EQ(a.tag_of, b.tag_of);
  std::size_t total = 0;
  for (int t = 0; t < 5; ++t) total += a.members(t).size();
  EXPECT_EQ(total, 50u);
}

}  // namespace
}  // namespace reagent
