#pragma once

#include <span>

#include "reagent/types.hpp"

namespace reagent {

/// (1/sqrt 2) * ||sqrt(p) - sqrt(q)||_2, clamped to [0, 1].
/// Throws LengthMismatchError if the vocabularies differ in size.
double hellinger(std::span<const double> p, std::span<const double> q);

inline double hellinger(const VocabDistribution& p, const VocabDistribution& q) {
  return hellinger(std::span<const double>(p.probs), std::span<const double>(q.probs));
}

}  // namespace reagent
