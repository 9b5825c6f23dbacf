#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "reagent/types.hpp"

namespace reagent {

/// Anything that can answer next-token probability queries for a causal LM.
/// Implementations must be safe for concurrent const calls.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  virtual std::size_t vocab_size() const = 0;
  virtual std::string name() const = 0;

  /// Distribution over the token following `context`.
  virtual VocabDistribution next_token_distribution(std::span<const TokenId> context) const = 0;

  /// Same, but each coordinate of token i's embedding is kept with
  /// probability `retention[i]` (zeroed otherwise). `seed` fixes the mask.
  virtual VocabDistribution masked_distribution(std::span<const TokenId> context,
                                                std::span<const double> retention,
                                                std::uint64_t seed) const = 0;
};

/// Throws EmptyContextError / VocabularyError.
void validate_context(std::span<const TokenId> context, std::size_t vocab_size);

/// Throws LengthMismatchError / ConfigError.
void validate_retention(std::span<const double> retention, std::size_t context_length);

inline double target_probability(const ModelBackend& backend, std::span<const TokenId> context,
                                 TokenId target) {
  return backend.next_token_distribution(context)[static_cast<std::size_t>(target)];
}

}  // namespace reagent
