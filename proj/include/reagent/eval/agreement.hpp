#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace reagent {

/// Known antecedent and distractor positions for one long-range agreement item.
struct AgreementAnnotation {
  std::vector<std::size_t> antecedent_positions;
  std::vector<std::size_t> distractor_positions;
  std::size_t rationale_length = 1;

  /// Throws ConfigError if the sets overlap, an index is outside the context
  /// or the rationale length is zero.
  void validate(std::size_t context_length) const;
};

/// Top `length` positions by score, ties to the lower index.
std::vector<std::size_t> extract_rationale(std::span<const double> scores, std::size_t length);

struct AgreementRatios {
  double ante_ratio = 0.0;
  double no_d_ratio = 0.0;
};

/// Fraction of rationales hitting an antecedent, and fraction containing no
/// distractor. Throws LengthMismatchError if the lists are not aligned.
AgreementRatios agreement_ratios(std::span<const std::vector<std::size_t>> rationales,
                                 std::span<const AgreementAnnotation> annotations);

}  // namespace reagent
