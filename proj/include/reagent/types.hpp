#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace reagent {

using TokenId = std::int32_t;

/// Token ids bound to a vocabulary. The last token is usually the target of
/// an attribution; everything before it is context.
class TokenSequence {
 public:
  TokenSequence(std::vector<TokenId> tokens, std::size_t vocab_size,
                std::vector<std::string> surface = {});

  std::span<const TokenId> tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  std::size_t vocab_size() const { return vocab_size_; }
  TokenId operator[](std::size_t i) const { return tokens_[i]; }

  /// Surface form for rendering; falls back to "#<id>".
  std::string surface(std::size_t i) const;
  bool has_surface() const { return !surface_.empty(); }

  /// Tokens strictly before `target_pos`.
  std::span<const TokenId> context(std::size_t target_pos) const;

 private:
  std::vector<TokenId> tokens_;
  std::size_t vocab_size_;
  std::vector<std::string> surface_;
};

/// Next-token probabilities over the full vocabulary.
struct VocabDistribution {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

/// Throws BackendError unless `dist` has `vocab_size` non-negative entries
/// summing to 1 within `tolerance`.
void validate_distribution(const VocabDistribution& dist, std::size_t vocab_size,
                           double tolerance = 1e-6);

/// Number of tokens ranked strictly above `token`; equal probabilities rank
/// the lower id first.
std::size_t rank_of(const VocabDistribution& dist, TokenId token);

}  // namespace reagent
