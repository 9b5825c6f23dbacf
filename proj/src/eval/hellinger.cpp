#include "reagent/eval/hellinger.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reagent/errors.hpp"

namespace reagent {

double hellinger(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw LengthMismatchError("vocabulary mismatch: " + std::to_string(p.size()) + " vs " +
                              std::to_string(q.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double diff = std::sqrt(p[i]) - std::sqrt(q[i]);
    sum += diff * diff;
  }
  return std::clamp(std::sqrt(0.5 * sum), 0.0, 1.0);
}

}  // namespace reagent
