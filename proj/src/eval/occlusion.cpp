#include "reagent/eval/occlusion.hpp"

#include <string>

#include "reagent/errors.hpp"

namespace reagent {

std::vector<double> brute_force_occlusion(const ModelBackend& backend, const TokenSequence& seq,
                                          std::size_t target_pos) {
  const auto context = seq.context(target_pos);
  if (context.size() > kMaxOcclusionContext) {
    throw OracleScaleError("occlusion oracle is limited to " +
                           std::to_string(kMaxOcclusionContext) + " context tokens, got " +
                           std::to_string(context.size()));
  }
  const auto target = static_cast<std::size_t>(seq[target_pos]);
  const double full = backend.next_token_distribution(context)[target];
  std::vector<double> drops(context.size());
  std::vector<double> retain(context.size(), 1.0);
  for (std::size_t i = 0; i < context.size(); ++i) {
    retain[i] = 0.0;
    // Retention is 0 or 1 everywhere, so the mask seed does not matter.
    drops[i] = full - backend.masked_distribution(context, retain, 0)[target];
    retain[i] = 1.0;
  }
  return drops;
}

}  // namespace reagent
