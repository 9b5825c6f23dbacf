#include "reagent/types.hpp"

#include <cmath>
#include <string>

#include "reagent/errors.hpp"

namespace reagent {

TokenSequence::TokenSequence(std::vector<TokenId> tokens, std::size_t vocab_size,
                             std::vector<std::string> surface)
    : tokens_(std::move(tokens)), vocab_size_(vocab_size), surface_(std::move(surface)) {
  if (vocab_size_ == 0) throw VocabularyError("vocabulary size must be positive");
  if (tokens_.size() < 2) {
    throw EmptyContextError("a sequence needs at least one context token and a target");
  }
  for (TokenId t : tokens_) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size_) {
      throw VocabularyError("token id " + std::to_string(t) + " outside vocabulary of size " +
                            std::to_string(vocab_size_));
    }
  }
  if (!surface_.empty() && surface_.size() != tokens_.size()) {
    throw LengthMismatchError("surface strings must align with tokens");
  }
}

std::string TokenSequence::surface(std::size_t i) const {
  if (i < surface_.size()) return surface_[i];
  return "#" + std::to_string(tokens_.at(i));
}

std::span<const TokenId> TokenSequence::context(std::size_t target_pos) const {
  if (target_pos == 0 || target_pos >= tokens_.size()) {
    throw ConfigError("target position " + std::to_string(target_pos) +
                      " outside [1, " + std::to_string(tokens_.size()) + ")");
  }
  return std::span<const TokenId>(tokens_).first(target_pos);
}

void validate_distribution(const VocabDistribution& dist, std::size_t vocab_size,
                           double tolerance) {
  if (dist.size() != vocab_size) {
    throw BackendError("distribution has " + std::to_string(dist.size()) +
                       " entries, vocabulary has " + std::to_string(vocab_size));
  }
  double sum = 0.0;
  for (double p : dist.probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw BackendError("distribution entry not in [0, inf)");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw BackendError("distribution sums to " + std::to_string(sum));
  }
}

std::size_t rank_of(const VocabDistribution& dist, TokenId token) {
  const auto t = static_cast<std::size_t>(token);
  const double pt = dist.probs.at(t);
  std::size_t above = 0;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist.probs[v] > pt || (dist.probs[v] == pt && v < t)) ++above;
  }
  return above;
}

}  // namespace reagent
