#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "reagent/backend/model_backend.hpp"
#include "reagent/backend/proposer.hpp"
#include "reagent/core/importance.hpp"
#include "reagent/types.hpp"

namespace reagent {

/// p(x_t | context) - p(x_t | context with `replaced` overwritten by
/// `proposal`). Requires 1 <= target_pos < seq.size().
double compute_predictive_delta(const ModelBackend& backend, const TokenSequence& seq,
                                std::size_t target_pos, const ReplacementSet& replaced,
                                const ReplacementProposal& proposal);

/// Same, with p(x_t | context) already known.
double compute_predictive_delta(const ModelBackend& backend, const TokenSequence& seq,
                                std::size_t target_pos, double original_prob,
                                const ReplacementSet& replaced,
                                const ReplacementProposal& proposal);

/// Stopping condition: replace the lowest-scored positions and ask whether
/// the target stays within the backend's top-k.
bool check_stop(const ModelBackend& backend, const ReplacementProposer& proposer,
                const TokenSequence& seq, std::size_t target_pos,
                const ImportanceState& state, const ReAGentConfig& cfg, Rng& rng);

/// Seed of run `run_index` for `target_pos`.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run_index, std::size_t target_pos);

/// One randomized run of the recursive update loop for the token at
/// `target_pos`. Context length 1 short-circuits to [1.0].
ImportanceState attribute_position(const ModelBackend& backend,
                                   const ReplacementProposer& proposer,
                                   const TokenSequence& seq, std::size_t target_pos,
                                   const ReAGentConfig& cfg, std::size_t run_index = 0);

struct PositionAttribution {
  std::size_t target_pos = 0;
  ImportanceState averaged;
  std::vector<ImportanceState> runs;
};

/// cfg.num_runs runs of attribute_position, averaged.
PositionAttribution attribute_averaged(const ModelBackend& backend,
                                       const ReplacementProposer& proposer,
                                       const TokenSequence& seq, std::size_t target_pos,
                                       const ReAGentConfig& cfg);

/// Target positions 1, 1 + stride, 1 + 2 * stride, ... below `length`.
std::vector<std::size_t> strided_targets(std::size_t length, std::size_t stride);

std::vector<PositionAttribution> attribute_sequence(const ModelBackend& backend,
                                                    const ReplacementProposer& proposer,
                                                    const TokenSequence& seq,
                                                    const ReAGentConfig& cfg,
                                                    std::size_t stride = 5);

}  // namespace reagent
