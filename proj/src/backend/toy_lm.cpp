#include "reagent/backend/toy_lm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reagent/core/importance.hpp"
#include "reagent/errors.hpp"
#include "reagent/rng.hpp"

namespace reagent {

ToyLM::ToyLM(ToyLmOptions options) : options_(options) {
  if (options_.vocab_size < 2) throw ConfigError("toy vocabulary needs at least 2 tokens");
  if (options_.embedding_dim < 1) throw ConfigError("toy embedding_dim must be positive");
  const std::size_t v = options_.vocab_size;
  const std::size_t d = options_.embedding_dim;
  Rng rng(derive_seed(options_.seed, {0x746f79ULL}));
  auto draw = [&] { return 2.0 * uniform01(rng) - 1.0; };

  embeddings_.resize(v * d);
  for (double& e : embeddings_) e = draw();
  weights_.resize(v * 2 * d);
  for (double& w : weights_) w = options_.output_scale * draw();
  bias_.resize(v);
  for (double& b : bias_) b = 0.5 * draw();
}

std::string ToyLM::name() const {
  return "toy-lm(v=" + std::to_string(options_.vocab_size) +
         ",d=" + std::to_string(options_.embedding_dim) +
         ",seed=" + std::to_string(options_.seed) + ")";
}

std::span<const double> ToyLM::embedding(TokenId token) const {
  return std::span<const double>(embeddings_)
      .subspan(static_cast<std::size_t>(token) * options_.embedding_dim, options_.embedding_dim);
}

std::vector<double> ToyLM::logits(std::span<const TokenId> context,
                                  std::span<const double> keep_mask) const {
  validate_context(context, options_.vocab_size);
  const std::size_t d = options_.embedding_dim;
  if (keep_mask.size() != context.size() * d) {
    throw LengthMismatchError("keep mask must be context_length x embedding_dim");
  }

  std::vector<double> features(2 * d, 0.0);
  for (std::size_t i = 0; i < context.size(); ++i) {
    const auto e = embedding(context[i]);
    for (std::size_t k = 0; k < d; ++k) features[k] += keep_mask[i * d + k] * e[k];
  }
  const auto n = static_cast<double>(context.size());
  for (std::size_t k = 0; k < d; ++k) features[k] /= n;
  const std::size_t last = context.size() - 1;
  const auto e_last = embedding(context[last]);
  for (std::size_t k = 0; k < d; ++k) features[d + k] = keep_mask[last * d + k] * e_last[k];

  std::vector<double> out(options_.vocab_size);
  for (std::size_t v = 0; v < options_.vocab_size; ++v) {
    double acc = bias_[v];
    const double* row = &weights_[v * 2 * d];
    for (std::size_t k = 0; k < 2 * d; ++k) acc += row[k] * features[k];
    out[v] = acc;
  }
  return out;
}

std::vector<double> ToyLM::sample_keep_mask(std::span<const double> retention,
                                            std::uint64_t seed) const {
  const std::size_t d = options_.embedding_dim;
  std::vector<double> mask(retention.size() * d);
  Rng rng(derive_seed(seed, {0x6d61736bULL}));
  for (std::size_t i = 0; i < retention.size(); ++i) {
    const double q = retention[i];
    for (std::size_t k = 0; k < d; ++k) {
      // Always draw so that mask coordinates line up across retention values.
      const double u = uniform01(rng);
      mask[i * d + k] = (q >= 1.0 || u < q) ? 1.0 : 0.0;
    }
  }
  return mask;
}

VocabDistribution ToyLM::next_token_distribution(std::span<const TokenId> context) const {
  const std::vector<double> ones(context.size() * options_.embedding_dim, 1.0);
  return {softmax(logits(context, ones))};
}

VocabDistribution ToyLM::masked_distribution(std::span<const TokenId> context,
                                             std::span<const double> retention,
                                             std::uint64_t seed) const {
  validate_context(context, options_.vocab_size);
  validate_retention(retention, context.size());
  return {softmax(logits(context, sample_keep_mask(retention, seed)))};
}

PlantedDependencyLM::PlantedDependencyLM(PlantedOptions options)
    : options_(std::move(options)), base_(options_.base) {
  const auto v = static_cast<TokenId>(base_.vocab_size());
  auto in_vocab = [v](TokenId t) { return t >= 0 && t < v; };
  if (!in_vocab(options_.key_token) || !in_vocab(options_.target_token)) {
    throw ConfigError("planted key/target outside vocabulary");
  }
  if (options_.key_token == options_.target_token) {
    throw ConfigError("planted key and target must differ");
  }
  for (TokenId f : options_.frequent_tokens) {
    if (!in_vocab(f) || f == options_.target_token) {
      throw ConfigError("frequent tokens must be in vocabulary and differ from the target");
    }
  }
  if (options_.key_channel >= base_.embedding_dim()) {
    throw ConfigError("key channel outside embedding");
  }
  if (!(options_.present_mass > 0.0 && options_.present_mass < 1.0 &&
        options_.absent_mass > 0.0 && options_.absent_mass < 1.0)) {
    throw ConfigError("planted masses must be in (0, 1)");
  }
}

std::string PlantedDependencyLM::name() const {
  return "planted(key=" + std::to_string(options_.key_token) +
         ",target=" + std::to_string(options_.target_token) + ")/" + base_.name();
}

VocabDistribution PlantedDependencyLM::compose(std::span<const TokenId> context,
                                               std::span<const double> keep_mask) const {
  const std::size_t d = base_.embedding_dim();
  bool key_present = false;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (context[i] == options_.key_token && keep_mask[i * d + options_.key_channel] != 0.0) {
      key_present = true;
      break;
    }
  }
  const double target_mass = key_present ? options_.present_mass : options_.absent_mass;
  const auto target = static_cast<std::size_t>(options_.target_token);

  // Base distribution with the target removed and renormalized.
  std::vector<double> rest = softmax(base_.logits(context, keep_mask));
  rest[target] = 0.0;
  double rest_sum = 0.0;
  for (double p : rest) rest_sum += p;

  const double other = 1.0 - target_mass;
  const double freq_share = options_.frequent_tokens.empty()
                                ? 0.0
                                : options_.frequent_weight /
                                      static_cast<double>(options_.frequent_tokens.size());
  const double base_weight = options_.frequent_tokens.empty() ? 1.0 : 1.0 - options_.frequent_weight;

  VocabDistribution out;
  out.probs.resize(rest.size());
  for (std::size_t v = 0; v < rest.size(); ++v) out.probs[v] = other * base_weight * rest[v] / rest_sum;
  for (TokenId f : options_.frequent_tokens) out.probs[static_cast<std::size_t>(f)] += other * freq_share;
  out.probs[target] = target_mass;
  return out;
}

VocabDistribution PlantedDependencyLM::next_token_distribution(
    std::span<const TokenId> context) const {
  validate_context(context, vocab_size());
  const std::vector<double> ones(context.size() * base_.embedding_dim(), 1.0);
  return compose(context, ones);
}

VocabDistribution PlantedDependencyLM::masked_distribution(std::span<const TokenId> context,
                                                           std::span<const double> retention,
                                                           std::uint64_t seed) const {
  validate_context(context, vocab_size());
  validate_retention(retention, context.size());
  return compose(context, base_.sample_keep_mask(retention, seed));
}

}  // namespace reagent
