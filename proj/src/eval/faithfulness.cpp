#include "reagent/eval/faithfulness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "reagent/errors.hpp"
#include "reagent/eval/hellinger.hpp"
#include "reagent/rng.hpp"

namespace reagent {

namespace {

constexpr std::uint64_t kZeroTag = 0x7a65726fULL;
constexpr std::uint64_t kSufficiencyTag = 0x6e73ULL;
constexpr std::uint64_t kComprehensivenessTag = 0x6e63ULL;
constexpr std::uint64_t kRandomTag = 0x726e64ULL;

double zero_distance(const ModelBackend& backend, std::span<const TokenId> context,
                     const VocabDistribution& full, std::uint64_t seed, std::size_t target_pos) {
  const std::vector<double> zeros(context.size(), 0.0);
  const auto zeroed =
      backend.masked_distribution(context, zeros, derive_seed(seed, {kZeroTag, target_pos}));
  const double d = hellinger(full, zeroed);
  if (d <= 0.0) {
    throw DegenerateBaselineError("zero-input distance is 0 at position " +
                                  std::to_string(target_pos) + "; backend ignores its input");
  }
  return d;
}

void check_scores(std::span<const double> scores, std::size_t context_length) {
  if (scores.size() != context_length) {
    throw LengthMismatchError("importance scores do not cover the context");
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("importance score outside [0, 1]");
  }
}

double perturbed(const ModelBackend& backend, std::span<const TokenId> context,
                 const VocabDistribution& full, std::span<const double> retention,
                 std::size_t samples, std::uint64_t seed, std::uint64_t tag,
                 std::size_t target_pos) {
  return mean_perturbed_distance(backend, context, full, retention, samples,
                                 derive_seed(seed, {tag, target_pos}));
}

}  // namespace

double delta_p_zero(const ModelBackend& backend, const TokenSequence& seq,
                    std::size_t target_pos, std::uint64_t seed) {
  const auto context = seq.context(target_pos);
  const auto full = backend.next_token_distribution(context);
  return zero_distance(backend, context, full, seed, target_pos);
}

double soft_ns_from_distances(double zero_distance, double perturbed_distance) {
  if (!(zero_distance > 0.0)) throw DegenerateBaselineError("zero-input distance is 0");
  return std::max(0.0, zero_distance - perturbed_distance) / zero_distance;
}

double soft_nc_from_distances(double zero_distance, double perturbed_distance) {
  if (!(zero_distance > 0.0)) throw DegenerateBaselineError("zero-input distance is 0");
  return perturbed_distance / zero_distance;
}

double mean_perturbed_distance(const ModelBackend& backend, std::span<const TokenId> context,
                               const VocabDistribution& full, std::span<const double> retention,
                               std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw ConfigError("need at least one mask sample");
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto dist = backend.masked_distribution(context, retention, derive_seed(seed, {s}));
    total += hellinger(full, dist);
  }
  return total / static_cast<double>(samples);
}

SoftScores evaluate_position(const ModelBackend& backend, const TokenSequence& seq,
                             std::size_t target_pos, std::span<const double> scores,
                             std::size_t samples, std::uint64_t seed) {
  const auto context = seq.context(target_pos);
  check_scores(scores, context.size());
  if (samples == 0) throw ConfigError("need at least one mask sample");
  const auto full = backend.next_token_distribution(context);

  SoftScores out;
  out.zero_distance = zero_distance(backend, context, full, seed, target_pos);

  std::vector<double> retain(scores.begin(), scores.end());
  const double kept =
      perturbed(backend, context, full, retain, samples, seed, kSufficiencyTag, target_pos);
  out.soft_ns = soft_ns_from_distances(out.zero_distance, kept);

  for (std::size_t i = 0; i < retain.size(); ++i) retain[i] = 1.0 - scores[i];
  const double removed =
      perturbed(backend, context, full, retain, samples, seed, kComprehensivenessTag, target_pos);
  out.soft_nc = soft_nc_from_distances(out.zero_distance, removed);
  return out;
}

double soft_ns(const ModelBackend& backend, const TokenSequence& seq, std::size_t target_pos,
               const ImportanceState& scores, std::size_t samples, std::uint64_t seed) {
  const auto context = seq.context(target_pos);
  check_scores(scores.scores, context.size());
  const auto full = backend.next_token_distribution(context);
  const double zero = zero_distance(backend, context, full, seed, target_pos);
  const double kept = perturbed(backend, context, full, scores.scores, samples, seed,
                                kSufficiencyTag, target_pos);
  return soft_ns_from_distances(zero, kept);
}

double soft_nc(const ModelBackend& backend, const TokenSequence& seq, std::size_t target_pos,
               const ImportanceState& scores, std::size_t samples, std::uint64_t seed) {
  const auto context = seq.context(target_pos);
  check_scores(scores.scores, context.size());
  const auto full = backend.next_token_distribution(context);
  const double zero = zero_distance(backend, context, full, seed, target_pos);
  std::vector<double> retain(scores.scores.size());
  for (std::size_t i = 0; i < retain.size(); ++i) retain[i] = 1.0 - scores.scores[i];
  const double removed = perturbed(backend, context, full, retain, samples, seed,
                                   kComprehensivenessTag, target_pos);
  return soft_nc_from_distances(zero, removed);
}

ImportanceState random_baseline_scores(std::size_t context_length, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kRandomTag}));
  return init_importance(context_length, rng);
}

double normalize_vs_random(double fa_value, double random_value) {
  if (!(random_value > 0.0)) {
    throw DegenerateBaselineError("random baseline value must be positive");
  }
  if (!(fa_value >= 0.0)) throw ConfigError("faithfulness value must be non-negative");
  if (fa_value == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(fa_value / random_value);
}

bool FaithfulnessReport::soft_nc_exceeds_one() const {
  return std::any_of(per_position.begin(), per_position.end(),
                     [](const auto& p) { return p.soft_nc > 1.0; });
}

FaithfulnessReport evaluate_sequence(const ModelBackend& backend, const TokenSequence& seq,
                                     std::span<const PositionAttribution> attributions,
                                     std::size_t samples, std::uint64_t seed) {
  if (attributions.empty()) throw EmptyReportError("no attributions to evaluate");
  FaithfulnessReport report;
  report.num_perturbation_samples = samples;
  report.seed = seed;
  double ns_sum = 0.0;
  double nc_sum = 0.0;
  for (const auto& attr : attributions) {
    try {
      const auto s =
          evaluate_position(backend, seq, attr.target_pos, attr.averaged.scores, samples, seed);
      report.per_position.push_back({attr.target_pos, s.soft_ns, s.soft_nc});
      ns_sum += s.soft_ns;
      nc_sum += s.soft_nc;
    } catch (const DegenerateBaselineError&) {
      ++report.skipped_positions;
    }
  }
  if (report.per_position.empty()) {
    throw EmptyReportError("every evaluated position has a degenerate zero-input baseline");
  }
  const auto n = static_cast<double>(report.per_position.size());
  report.sequence_soft_ns = ns_sum / n;
  report.sequence_soft_nc = nc_sum / n;
  return report;
}

namespace {

double safe_log_ratio(double fa, double random) {
  if (!(random > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return normalize_vs_random(fa, random);
}

}  // namespace

FaithfulnessReport evaluate_against_random(const ModelBackend& backend, const TokenSequence& seq,
                                           std::span<const PositionAttribution> attributions,
                                           std::size_t samples, std::uint64_t seed) {
  FaithfulnessReport report = evaluate_sequence(backend, seq, attributions, samples, seed);

  std::vector<PositionAttribution> random;
  random.reserve(attributions.size());
  for (const auto& attr : attributions) {
    PositionAttribution r;
    r.target_pos = attr.target_pos;
    r.averaged = random_baseline_scores(attr.averaged.size(),
                                        derive_seed(seed, {kRandomTag, attr.target_pos}));
    random.push_back(std::move(r));
  }
  const FaithfulnessReport baseline = evaluate_sequence(backend, seq, random, samples, seed);
  report.random_soft_ns = baseline.sequence_soft_ns;
  report.random_soft_nc = baseline.sequence_soft_nc;
  report.log_ratio_vs_random =
      LogRatio{safe_log_ratio(report.sequence_soft_ns, baseline.sequence_soft_ns),
               safe_log_ratio(report.sequence_soft_nc, baseline.sequence_soft_nc)};
  return report;
}

}  // namespace reagent
