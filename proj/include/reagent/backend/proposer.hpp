#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "reagent/core/importance.hpp"
#include "reagent/rng.hpp"
#include "reagent/types.hpp"

namespace reagent {

enum class ReplacementStrategy { kMaskedLm, kRandomVocab, kPosMatched };

std::string to_string(ReplacementStrategy strategy);
/// Accepts "masked-lm", "random-vocab", "pos-matched"; throws ConfigError.
ReplacementStrategy parse_strategy(const std::string& name);

struct ReplacementProposal {
  std::map<std::size_t, TokenId> substitutions;
  ReplacementStrategy strategy = ReplacementStrategy::kRandomVocab;
  /// Set when some position could only be "replaced" by its own token.
  bool degenerate = false;
};

/// Context with every position of `replaced` overwritten by the proposal.
/// Throws MalformedProposalError if a position is missing or out of range.
std::vector<TokenId> apply_proposal(std::span<const TokenId> context,
                                    const ReplacementSet& replaced,
                                    const ReplacementProposal& proposal,
                                    std::size_t vocab_size);

class ReplacementProposer {
 public:
  virtual ~ReplacementProposer() = default;
  virtual ReplacementStrategy strategy() const = 0;
  virtual ReplacementProposal propose(std::span<const TokenId> context,
                                      const ReplacementSet& positions, Rng& rng) const = 0;
};

/// Something that fills masked positions, like a masked LM.
class FillSource {
 public:
  virtual ~FillSource() = default;
  /// All `positions` are masked at once. temperature 0 means top-1.
  virtual std::map<std::size_t, TokenId> fill(std::span<const TokenId> tokens,
                                              std::span<const std::size_t> positions,
                                              double temperature, Rng& rng) const = 0;
};

/// Stand-in for a masked LM: fill scores for a slot are a seeded hash of its
/// (left, right) neighbours, where a masked or missing neighbour reads as a
/// mask symbol.
class ToyFillModel : public FillSource {
 public:
  ToyFillModel(std::size_t vocab_size, std::uint64_t seed, std::vector<TokenId> banned = {});

  std::map<std::size_t, TokenId> fill(std::span<const TokenId> tokens,
                                      std::span<const std::size_t> positions,
                                      double temperature, Rng& rng) const override;

  std::vector<double> slot_scores(std::int64_t left, std::int64_t right) const;

 private:
  std::size_t vocab_size_;
  std::uint64_t seed_;
  std::vector<bool> banned_;
};

/// Part-of-speech class per vocabulary id.
struct PosTagTable {
  std::vector<int> tag_of;

  /// Seeded assignment of `vocab_size` ids into `num_tags` classes.
  static PosTagTable toy(std::size_t vocab_size, std::uint64_t seed, int num_tags = 8);
  std::vector<TokenId> members(int tag) const;
};

class MaskedLmProposer : public ReplacementProposer {
 public:
  MaskedLmProposer(std::shared_ptr<const FillSource> source, double temperature = 0.0);
  ReplacementStrategy strategy() const override { return ReplacementStrategy::kMaskedLm; }
  ReplacementProposal propose(std::span<const TokenId> context, const ReplacementSet& positions,
                              Rng& rng) const override;

 private:
  std::shared_ptr<const FillSource> source_;
  double temperature_;
};

class RandomVocabProposer : public ReplacementProposer {
 public:
  explicit RandomVocabProposer(std::size_t vocab_size);
  ReplacementStrategy strategy() const override { return ReplacementStrategy::kRandomVocab; }
  ReplacementProposal propose(std::span<const TokenId> context, const ReplacementSet& positions,
                              Rng& rng) const override;

 private:
  std::size_t vocab_size_;
};

class PosMatchedProposer : public ReplacementProposer {
 public:
  explicit PosMatchedProposer(PosTagTable table);
  ReplacementStrategy strategy() const override { return ReplacementStrategy::kPosMatched; }
  ReplacementProposal propose(std::span<const TokenId> context, const ReplacementSet& positions,
                              Rng& rng) const override;

 private:
  PosTagTable table_;
  std::map<int, std::vector<TokenId>> classes_;
};

}  // namespace reagent
