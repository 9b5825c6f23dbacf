#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reagent/backend/model_backend.hpp"

namespace reagent {

struct ToyLmOptions {
  std::size_t vocab_size = 64;
  std::size_t embedding_dim = 16;
  std::uint64_t seed = 0;
  /// Scale of the output projection; larger gives peakier distributions.
  double output_scale = 1.5;
};

/// Small deterministic causal LM used as an offline oracle.
///
/// features = [mean_i(m_i * E[x_i]), m_last * E[x_last]]
/// probs    = softmax(W * features + b)
///
/// where m_i is the per-coordinate keep mask of position i (all ones for
/// unmasked queries). Immutable after construction.
class ToyLM : public ModelBackend {
 public:
  explicit ToyLM(ToyLmOptions options = {});

  std::size_t vocab_size() const override { return options_.vocab_size; }
  std::string name() const override;
  std::size_t embedding_dim() const { return options_.embedding_dim; }

  VocabDistribution next_token_distribution(std::span<const TokenId> context) const override;
  VocabDistribution masked_distribution(std::span<const TokenId> context,
                                        std::span<const double> retention,
                                        std::uint64_t seed) const override;

  /// Logits given an explicit keep mask laid out as len x embedding_dim.
  std::vector<double> logits(std::span<const TokenId> context,
                             std::span<const double> keep_mask) const;

  /// Bernoulli keep mask, len x embedding_dim, seeded.
  std::vector<double> sample_keep_mask(std::span<const double> retention,
                                       std::uint64_t seed) const;

  std::span<const double> embedding(TokenId token) const;

 private:
  ToyLmOptions options_;
  std::vector<double> embeddings_;  // vocab x dim
  std::vector<double> weights_;     // vocab x 2*dim
  std::vector<double> bias_;        // vocab
};

struct PlantedOptions {
  ToyLmOptions base{};
  TokenId key_token = 5;
  TokenId target_token = 3;
  double present_mass = 0.9;
  double absent_mass = 0.1;
  /// Tokens that share a fixed slice of the non-target mass, so the target
  /// falls out of the top-3 when the key is absent.
  std::vector<TokenId> frequent_tokens{10, 11, 12, 13};
  double frequent_weight = 0.5;
  /// Embedding coordinate whose survival marks the key as present.
  std::size_t key_channel = 0;
};

/// Toy model whose target depends on exactly one token.
///
/// P(target) = present_mass if some position holds key_token with its key
/// channel unmasked, absent_mass otherwise. The remaining mass is split
/// between the frequent tokens (uniformly) and the base ToyLM's distribution
/// restricted to non-target tokens.
class PlantedDependencyLM : public ModelBackend {
 public:
  explicit PlantedDependencyLM(PlantedOptions options = {});

  std::size_t vocab_size() const override { return base_.vocab_size(); }
  std::string name() const override;

  VocabDistribution next_token_distribution(std::span<const TokenId> context) const override;
  VocabDistribution masked_distribution(std::span<const TokenId> context,
                                        std::span<const double> retention,
                                        std::uint64_t seed) const override;

  const PlantedOptions& options() const { return options_; }
  const ToyLM& base() const { return base_; }

 private:
  VocabDistribution compose(std::span<const TokenId> context,
                            std::span<const double> keep_mask) const;

  PlantedOptions options_;
  ToyLM base_;
};

}  // namespace reagent
