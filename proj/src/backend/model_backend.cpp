#include "reagent/backend/model_backend.hpp"

#include <string>

#include "reagent/errors.hpp"

namespace reagent {

void validate_context(std::span<const TokenId> context, std::size_t vocab_size) {
  if (context.empty()) throw EmptyContextError("empty context");
  for (TokenId t : context) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
      throw VocabularyError("unknown token id " + std::to_string(t));
    }
  }
}

void validate_retention(std::span<const double> retention, std::size_t context_length) {
  if (retention.size() != context_length) {
    throw LengthMismatchError("retention has " + std::to_string(retention.size()) +
                              " entries for a context of " + std::to_string(context_length));
  }
  for (double q : retention) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("retention probability outside [0, 1]");
  }
}

}  // namespace reagent
