#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "reagent/rng.hpp"

namespace reagent {

/// Per-position importance over a context. `logits` is the accumulation
/// substrate; `scores` is always softmax(logits).
struct ImportanceState {
  std::vector<double> logits;
  std::vector<double> scores;
  std::size_t step_count = 0;
  bool converged = false;

  std::size_t size() const { return scores.size(); }
};

/// Positions of the context that get replaced in one probe.
struct ReplacementSet {
  std::vector<std::size_t> positions;  // sorted, distinct
  double ratio = 0.0;

  bool contains(std::size_t pos) const;
};

struct ReAGentConfig {
  double replace_ratio = 0.3;
  double stop_replace_fraction = 0.7;
  /// When set, the stopping check replaces exactly this many positions
  /// (capped at the context length) instead of the fraction.
  std::optional<std::size_t> stop_replace_count;
  std::size_t tolerance_k = 3;
  std::size_t max_steps = 1000;
  std::size_t num_runs = 3;
  double logit_clamp_epsilon = 1e-4;
  std::uint64_t seed = 0;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;

  /// Number of lowest-scored positions replaced by the stopping check.
  std::size_t stop_count(std::size_t context_length) const;
};

std::vector<double> softmax(std::span<const double> logits);

ImportanceState init_importance(std::size_t context_length, Rng& rng);
ImportanceState init_importance(std::size_t context_length, std::uint64_t seed);

/// max(1, round(ratio * context_length)), clamped to the length.
std::size_t replacement_set_size(std::size_t context_length, double ratio);

ReplacementSet select_replacement_set(std::size_t context_length, double ratio, Rng& rng);
ReplacementSet select_replacement_set(std::size_t context_length, double ratio,
                                      std::uint64_t seed);

/// ln((1 + d) / (1 - d)) with d clamped to +-(1 - 2 * clamp_eps). This is
/// logit((d + 1) / 2); written this way it is exactly odd in d.
double logit_increment(double delta_p, double clamp_eps);

/// One accumulation step: positions in `replaced` move by
/// logit_increment(delta_p), all others by logit_increment(-delta_p).
ImportanceState update_scores(const ImportanceState& state, double delta_p,
                              const ReplacementSet& replaced, double clamp_eps);

/// Mean of the converged runs' scores (or of all runs if none converged),
/// renormalized. Throws Error on an empty list or ragged lengths.
ImportanceState average_runs(std::span<const ImportanceState> states);

/// Indices of the `count` lowest scores, ties broken by lower index.
std::vector<std::size_t> lowest_positions(std::span<const double> scores, std::size_t count);

/// Indices of the `count` highest scores, ties broken by lower index.
std::vector<std::size_t> highest_positions(std::span<const double> scores, std::size_t count);

}  // namespace reagent
