#pragma once

#include <cstddef>
#include <vector>

#include "reagent/backend/model_backend.hpp"
#include "reagent/types.hpp"

namespace reagent {

inline constexpr std::size_t kMaxOcclusionContext = 16;

/// Leave-one-out ground truth: for each context position i,
/// p(x_t | context) - p(x_t | context with embedding i zeroed).
/// Throws OracleScaleError above kMaxOcclusionContext positions.
std::vector<double> brute_force_occlusion(const ModelBackend& backend, const TokenSequence& seq,
                                          std::size_t target_pos);

}  // namespace reagent
