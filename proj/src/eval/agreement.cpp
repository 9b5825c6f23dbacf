#include "reagent/eval/agreement.hpp"

#include <algorithm>

#include "reagent/core/importance.hpp"
#include "reagent/errors.hpp"

namespace reagent {

void AgreementAnnotation::validate(std::size_t context_length) const {
  if (rationale_length == 0) throw ConfigError("rationale length must be positive");
  for (std::size_t a : antecedent_positions) {
    if (a >= context_length) throw ConfigError("antecedent position outside context");
    if (std::find(distractor_positions.begin(), distractor_positions.end(), a) !=
        distractor_positions.end()) {
      throw ConfigError("antecedent and distractor positions overlap");
    }
  }
  for (std::size_t d : distractor_positions) {
    if (d >= context_length) throw ConfigError("distractor position outside context");
  }
}

std::vector<std::size_t> extract_rationale(std::span<const double> scores, std::size_t length) {
  return highest_positions(scores, length);
}

AgreementRatios agreement_ratios(std::span<const std::vector<std::size_t>> rationales,
                                 std::span<const AgreementAnnotation> annotations) {
  if (rationales.size() != annotations.size()) {
    throw LengthMismatchError("rationales and annotations are not aligned");
  }
  if (rationales.empty()) return {};
  std::size_t hits = 0;
  std::size_t clean = 0;
  for (std::size_t i = 0; i < rationales.size(); ++i) {
    const auto& r = rationales[i];
    auto contains_any = [&r](const std::vector<std::size_t>& set) {
      return std::any_of(set.begin(), set.end(), [&r](std::size_t p) {
        return std::find(r.begin(), r.end(), p) != r.end();
      });
    };
    if (contains_any(annotations[i].antecedent_positions)) ++hits;
    if (!contains_any(annotations[i].distractor_positions)) ++clean;
  }
  const auto n = static_cast<double>(rationales.size());
  return {static_cast<double>(hits) / n, static_cast<double>(clean) / n};
}

}  // namespace reagent
