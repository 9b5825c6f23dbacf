#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "reagent/backend/model_backend.hpp"
#include "reagent/core/importance.hpp"
#include "reagent/core/reagent.hpp"
#include "reagent/types.hpp"

namespace reagent {

inline constexpr std::size_t kDefaultMaskSamples = 30;

/// Hellinger distance between the full-context distribution and the one with
/// every embedding zeroed. Throws DegenerateBaselineError when it is 0.
double delta_p_zero(const ModelBackend& backend, const TokenSequence& seq,
                    std::size_t target_pos, std::uint64_t seed);

/// max(0, baseline - perturbed) / baseline.
double soft_ns_from_distances(double zero_distance, double perturbed_distance);
/// perturbed / baseline, unclamped.
double soft_nc_from_distances(double zero_distance, double perturbed_distance);

/// Mean Hellinger distance from the full distribution over `samples`
/// independently seeded soft perturbations with the given retention.
double mean_perturbed_distance(const ModelBackend& backend, std::span<const TokenId> context,
                               const VocabDistribution& full, std::span<const double> retention,
                               std::size_t samples, std::uint64_t seed);

/// Sufficiency: each token kept with probability equal to its score.
double soft_ns(const ModelBackend& backend, const TokenSequence& seq, std::size_t target_pos,
               const ImportanceState& scores, std::size_t samples, std::uint64_t seed);

/// Comprehensiveness: each token kept with probability 1 - score.
double soft_nc(const ModelBackend& backend, const TokenSequence& seq, std::size_t target_pos,
               const ImportanceState& scores, std::size_t samples, std::uint64_t seed);

struct SoftScores {
  double zero_distance = 0.0;
  double soft_ns = 0.0;
  double soft_nc = 0.0;
};

/// Both metrics for one position, sharing the baseline and full distribution.
/// Mask seeds depend only on (seed, target_pos, sample), so two FAs
/// evaluated with the same seed see the same Bernoulli draws.
SoftScores evaluate_position(const ModelBackend& backend, const TokenSequence& seq,
                             std::size_t target_pos, std::span<const double> scores,
                             std::size_t samples, std::uint64_t seed);

/// Softmax of i.i.d. uniform logits on [-1, 1].
ImportanceState random_baseline_scores(std::size_t context_length, std::uint64_t seed);

/// ln(fa / random); -infinity when fa == 0.
/// Throws DegenerateBaselineError if random <= 0, ConfigError if fa < 0.
double normalize_vs_random(double fa_value, double random_value);

struct PositionFaithfulness {
  std::size_t target_pos = 0;
  double soft_ns = 0.0;
  double soft_nc = 0.0;
};

/// ln(FA / random) per metric. -infinity when the FA value is exactly 0,
/// NaN when the random baseline itself is 0.
struct LogRatio {
  double soft_ns = 0.0;
  double soft_nc = 0.0;
};

struct FaithfulnessReport {
  std::vector<PositionFaithfulness> per_position;
  double sequence_soft_ns = 0.0;
  double sequence_soft_nc = 0.0;
  std::size_t skipped_positions = 0;
  std::size_t num_perturbation_samples = 0;
  std::uint64_t seed = 0;

  /// Filled by evaluate_against_random.
  std::optional<double> random_soft_ns;
  std::optional<double> random_soft_nc;
  std::optional<LogRatio> log_ratio_vs_random;

  bool soft_nc_exceeds_one() const;
};

/// Per-position Soft-NS/NC plus sequence means. Degenerate positions are
/// skipped and counted; EmptyReportError if every position is degenerate.
FaithfulnessReport evaluate_sequence(const ModelBackend& backend, const TokenSequence& seq,
                                     std::span<const PositionAttribution> attributions,
                                     std::size_t samples, std::uint64_t seed);

/// evaluate_sequence for the FA and for a random baseline at the same
/// positions, with the log ratios filled in.
FaithfulnessReport evaluate_against_random(const ModelBackend& backend, const TokenSequence& seq,
                                           std::span<const PositionAttribution> attributions,
                                           std::size_t samples, std::uint64_t seed);

}  // namespace reagent
