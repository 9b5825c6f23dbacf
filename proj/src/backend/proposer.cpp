#include "reagent/backend/proposer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "reagent/errors.hpp"

namespace reagent {

std::string to_string(ReplacementStrategy strategy) {
  switch (strategy) {
    case ReplacementStrategy::kMaskedLm:
      return "masked-lm";
    case ReplacementStrategy::kRandomVocab:
      return "random-vocab";
    case ReplacementStrategy::kPosMatched:
      return "pos-matched";
  }
  return "unknown";
}

ReplacementStrategy parse_strategy(const std::string& name) {
  if (name == "masked-lm") return ReplacementStrategy::kMaskedLm;
  if (name == "random-vocab") return ReplacementStrategy::kRandomVocab;
  if (name == "pos-matched") return ReplacementStrategy::kPosMatched;
  throw ConfigError("unknown replacement strategy '" + name + "'");
}

std::vector<TokenId> apply_proposal(std::span<const TokenId> context,
                                    const ReplacementSet& replaced,
                                    const ReplacementProposal& proposal,
                                    std::size_t vocab_size) {
  std::vector<TokenId> out(context.begin(), context.end());
  for (std::size_t pos : replaced.positions) {
    if (pos >= out.size()) throw MalformedProposalError("replacement position outside context");
    const auto it = proposal.substitutions.find(pos);
    if (it == proposal.substitutions.end()) {
      throw MalformedProposalError("proposal has no token for position " + std::to_string(pos));
    }
    if (it->second < 0 || static_cast<std::size_t>(it->second) >= vocab_size) {
      throw MalformedProposalError("proposal token " + std::to_string(it->second) +
                                   " outside vocabulary");
    }
    out[pos] = it->second;
  }
  return out;
}

ToyFillModel::ToyFillModel(std::size_t vocab_size, std::uint64_t seed, std::vector<TokenId> banned)
    : vocab_size_(vocab_size), seed_(seed), banned_(vocab_size, false) {
  for (TokenId t : banned) {
    if (t >= 0 && static_cast<std::size_t>(t) < vocab_size) banned_[static_cast<std::size_t>(t)] = true;
  }
  if (std::all_of(banned_.begin(), banned_.end(), [](bool b) { return b; })) {
    throw ConfigError("toy fill model bans the whole vocabulary");
  }
}

std::vector<double> ToyFillModel::slot_scores(std::int64_t left, std::int64_t right) const {
  std::vector<double> scores(vocab_size_);
  const std::uint64_t slot = derive_seed(seed_, {static_cast<std::uint64_t>(left + 1),
                                                 static_cast<std::uint64_t>(right + 1)});
  for (std::size_t v = 0; v < vocab_size_; ++v) {
    scores[v] = banned_[v] ? -std::numeric_limits<double>::infinity()
                           : 4.0 * static_cast<double>(splitmix64(slot ^ splitmix64(v)) >> 11) *
                                 0x1.0p-53;
  }
  return scores;
}

std::map<std::size_t, TokenId> ToyFillModel::fill(std::span<const TokenId> tokens,
                                                  std::span<const std::size_t> positions,
                                                  double temperature, Rng& rng) const {
  std::vector<bool> masked(tokens.size(), false);
  for (std::size_t p : positions) {
    if (p >= tokens.size()) throw MalformedProposalError("fill position outside sequence");
    masked[p] = true;
  }
  auto neighbour = [&](std::size_t i, int dir) -> std::int64_t {
    const auto j = static_cast<std::int64_t>(i) + dir;
    if (j < 0 || j >= static_cast<std::int64_t>(tokens.size())) return -1;
    if (masked[static_cast<std::size_t>(j)]) return -1;
    return tokens[static_cast<std::size_t>(j)];
  };

  std::map<std::size_t, TokenId> fills;
  for (std::size_t p : positions) {
    const auto scores = slot_scores(neighbour(p, -1), neighbour(p, +1));
    if (temperature <= 0.0) {
      fills[p] = static_cast<TokenId>(std::max_element(scores.begin(), scores.end()) - scores.begin());
      continue;
    }
    std::vector<double> weights(scores.size());
    const double peak = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (std::size_t v = 0; v < scores.size(); ++v) {
      weights[v] = std::exp((scores[v] - peak) / temperature);
      total += weights[v];
    }
    double u = uniform01(rng) * total;
    std::size_t chosen = 0;
    for (; chosen + 1 < weights.size(); ++chosen) {
      if (u < weights[chosen]) break;
      u -= weights[chosen];
    }
    while (banned_[chosen]) chosen = (chosen + 1) % vocab_size_;
    fills[p] = static_cast<TokenId>(chosen);
  }
  return fills;
}

PosTagTable PosTagTable::toy(std::size_t vocab_size, std::uint64_t seed, int num_tags) {
  if (num_tags < 1) throw ConfigError("need at least one tag");
  PosTagTable table;
  table.tag_of.resize(vocab_size);
  for (std::size_t v = 0; v < vocab_size; ++v) {
    table.tag_of[v] = static_cast<int>(derive_seed(seed, {0x706f73ULL, v}) %
                                       static_cast<std::uint64_t>(num_tags));
  }
  return table;
}

std::vector<TokenId> PosTagTable::members(int tag) const {
  std::vector<TokenId> out;
  for (std::size_t v = 0; v < tag_of.size(); ++v) {
    if (tag_of[v] == tag) out.push_back(static_cast<TokenId>(v));
  }
  return out;
}

MaskedLmProposer::MaskedLmProposer(std::shared_ptr<const FillSource> source, double temperature)
    : source_(std::move(source)), temperature_(temperature) {
  if (!source_) throw StrategyUnavailableError("masked-lm strategy needs a fill source");
  if (temperature_ < 0.0) throw ConfigError("fill temperature must be >= 0");
}

ReplacementProposal MaskedLmProposer::propose(std::span<const TokenId> context,
                                              const ReplacementSet& positions, Rng& rng) const {
  ReplacementProposal proposal;
  proposal.strategy = strategy();
  if (positions.positions.empty()) return proposal;
  proposal.substitutions = source_->fill(context, positions.positions, temperature_, rng);
  for (const auto& [pos, tok] : proposal.substitutions) {
    if (pos < context.size() && context[pos] == tok) proposal.degenerate = true;
  }
  return proposal;
}

RandomVocabProposer::RandomVocabProposer(std::size_t vocab_size) : vocab_size_(vocab_size) {
  if (vocab_size_ == 0) throw ConfigError("empty vocabulary");
}

ReplacementProposal RandomVocabProposer::propose(std::span<const TokenId> context,
                                                 const ReplacementSet& positions,
                                                 Rng& rng) const {
  ReplacementProposal proposal;
  proposal.strategy = strategy();
  for (std::size_t pos : positions.positions) {
    const auto tok = static_cast<TokenId>(uniform_index(rng, vocab_size_));
    proposal.substitutions[pos] = tok;
    if (pos < context.size() && context[pos] == tok) proposal.degenerate = true;
  }
  return proposal;
}

PosMatchedProposer::PosMatchedProposer(PosTagTable table) : table_(std::move(table)) {
  if (table_.tag_of.empty()) throw StrategyUnavailableError("empty part-of-speech table");
  for (std::size_t v = 0; v < table_.tag_of.size(); ++v) {
    classes_[table_.tag_of[v]].push_back(static_cast<TokenId>(v));
  }
}

ReplacementProposal PosMatchedProposer::propose(std::span<const TokenId> context,
                                                const ReplacementSet& positions, Rng& rng) const {
  ReplacementProposal proposal;
  proposal.strategy = strategy();
  for (std::size_t pos : positions.positions) {
    if (pos >= context.size()) throw MalformedProposalError("position outside context");
    const auto original = static_cast<std::size_t>(context[pos]);
    if (original >= table_.tag_of.size()) throw VocabularyError("token has no tag");
    const auto& members = classes_.at(table_.tag_of[original]);
    const TokenId tok = members[uniform_index(rng, members.size())];
    proposal.substitutions[pos] = tok;
    if (tok == context[pos]) proposal.degenerate = true;
  }
  return proposal;
}

}  // namespace reagent
