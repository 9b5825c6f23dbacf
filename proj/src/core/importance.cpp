#include "reagent/core/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "reagent/errors.hpp"

namespace reagent {

bool ReplacementSet::contains(std::size_t pos) const {
  return std::binary_search(positions.begin(), positions.end(), pos);
}

void ReAGentConfig::validate() const {
  if (!(replace_ratio > 0.0 && replace_ratio <= 1.0)) {
    throw ConfigError("replace_ratio must be in (0, 1]");
  }
  if (!(stop_replace_fraction > 0.0 && stop_replace_fraction < 1.0)) {
    throw ConfigError("stop_replace_fraction must be in (0, 1)");
  }
  if (tolerance_k < 1) throw ConfigError("tolerance_k must be >= 1");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (num_runs < 1) throw ConfigError("num_runs must be >= 1");
  if (!(logit_clamp_epsilon > 0.0 && logit_clamp_epsilon < 0.5)) {
    throw ConfigError("logit_clamp_epsilon must be in (0, 0.5)");
  }
}

std::size_t ReAGentConfig::stop_count(std::size_t context_length) const {
  if (stop_replace_count) return std::min(*stop_replace_count, context_length);
  return static_cast<std::size_t>(
      std::floor(stop_replace_fraction * static_cast<double>(context_length)));
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

ImportanceState init_importance(std::size_t context_length, Rng& rng) {
  if (context_length == 0) throw EmptyContextError("cannot attribute over an empty context");
  ImportanceState state;
  state.logits.resize(context_length);
  for (double& l : state.logits) l = 2.0 * uniform01(rng) - 1.0;
  state.scores = softmax(state.logits);
  return state;
}

ImportanceState init_importance(std::size_t context_length, std::uint64_t seed) {
  Rng rng(seed);
  return init_importance(context_length, rng);
}

std::size_t replacement_set_size(std::size_t context_length, double ratio) {
  const auto n =
      static_cast<std::size_t>(std::llround(ratio * static_cast<double>(context_length)));
  return std::clamp<std::size_t>(n, 1, context_length);
}

ReplacementSet select_replacement_set(std::size_t context_length, double ratio, Rng& rng) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("replacement ratio must be in (0, 1]");
  if (context_length == 0) throw EmptyContextError("cannot select from an empty context");
  const std::size_t size = replacement_set_size(context_length, ratio);

  // Partial Fisher-Yates.
  std::vector<std::size_t> pool(context_length);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + uniform_index(rng, context_length - i);
    std::swap(pool[i], pool[j]);
  }
  ReplacementSet set;
  set.ratio = ratio;
  set.positions.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
  std::sort(set.positions.begin(), set.positions.end());
  return set;
}

ReplacementSet select_replacement_set(std::size_t context_length, double ratio,
                                      std::uint64_t seed) {
  Rng rng(seed);
  return select_replacement_set(context_length, ratio, rng);
}

double logit_increment(double delta_p, double clamp_eps) {
  const double bound = 1.0 - 2.0 * clamp_eps;
  const double d = std::clamp(delta_p, -bound, bound);
  return std::log1p(d) - std::log1p(-d);
}

ImportanceState update_scores(const ImportanceState& state, double delta_p,
                              const ReplacementSet& replaced, double clamp_eps) {
  const double up = logit_increment(delta_p, clamp_eps);
  const double down = logit_increment(-delta_p, clamp_eps);
  ImportanceState next = state;
  for (std::size_t i = 0; i < next.logits.size(); ++i) {
    next.logits[i] += replaced.contains(i) ? up : down;
  }
  next.scores = softmax(next.logits);
  ++next.step_count;
  return next;
}

ImportanceState average_runs(std::span<const ImportanceState> states) {
  if (states.empty()) throw Error("cannot average zero runs");
  const std::size_t n = states.front().size();
  for (const auto& s : states) {
    if (s.size() != n) throw LengthMismatchError("runs cover different context lengths");
  }
  const bool any_converged =
      std::any_of(states.begin(), states.end(), [](const auto& s) { return s.converged; });

  ImportanceState out;
  out.scores.assign(n, 0.0);
  std::size_t used = 0;
  std::size_t steps = 0;
  for (const auto& s : states) {
    if (any_converged && !s.converged) continue;
    for (std::size_t i = 0; i < n; ++i) out.scores[i] += s.scores[i];
    steps += s.step_count;
    ++used;
  }
  const double total = std::accumulate(out.scores.begin(), out.scores.end(), 0.0);
  for (double& v : out.scores) v /= total;
  out.logits.resize(n);
  std::transform(out.scores.begin(), out.scores.end(), out.logits.begin(),
                 [](double s) { return std::log(s); });
  out.step_count = steps / used;
  out.converged = any_converged;
  return out;
}

namespace {

std::vector<std::size_t> ordered_positions(std::span<const double> scores, bool ascending) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ascending ? scores[a] < scores[b] : scores[a] > scores[b];
  });
  return order;
}

}  // namespace

std::vector<std::size_t> lowest_positions(std::span<const double> scores, std::size_t count) {
  auto order = ordered_positions(scores, true);
  order.resize(std::min(count, order.size()));
  return order;
}

std::vector<std::size_t> highest_positions(std::span<const double> scores, std::size_t count) {
  auto order = ordered_positions(scores, false);
  order.resize(std::min(count, order.size()));
  return order;
}

}  // namespace reagent
