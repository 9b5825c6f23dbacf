#include "reagent/core/reagent.hpp"

#include <algorithm>
#include <string>

#include "reagent/errors.hpp"

namespace reagent {

namespace {

void check_target(const TokenSequence& seq, std::size_t target_pos) {
  if (target_pos < 1 || target_pos >= seq.size()) {
    throw ConfigError("target position " + std::to_string(target_pos) + " outside [1, " +
                      std::to_string(seq.size()) + ")");
  }
}

void check_vocab(const ModelBackend& backend, const TokenSequence& seq) {
  if (backend.vocab_size() != seq.vocab_size()) {
    throw VocabularyError("backend vocabulary (" + std::to_string(backend.vocab_size()) +
                          ") does not match sequence vocabulary (" +
                          std::to_string(seq.vocab_size()) + ")");
  }
}

}  // namespace

double compute_predictive_delta(const ModelBackend& backend, const TokenSequence& seq,
                                std::size_t target_pos, double original_prob,
                                const ReplacementSet& replaced,
                                const ReplacementProposal& proposal) {
  check_target(seq, target_pos);
  check_vocab(backend, seq);
  const auto context = seq.context(target_pos);
  if (replaced.positions.empty()) return 0.0;
  const auto modified = apply_proposal(context, replaced, proposal, seq.vocab_size());
  const double replaced_prob =
      backend.next_token_distribution(modified)[static_cast<std::size_t>(seq[target_pos])];
  return std::clamp(original_prob - replaced_prob, -1.0, 1.0);
}

double compute_predictive_delta(const ModelBackend& backend, const TokenSequence& seq,
                                std::size_t target_pos, const ReplacementSet& replaced,
                                const ReplacementProposal& proposal) {
  check_target(seq, target_pos);
  check_vocab(backend, seq);
  const double original = target_probability(backend, seq.context(target_pos), seq[target_pos]);
  return compute_predictive_delta(backend, seq, target_pos, original, replaced, proposal);
}

bool check_stop(const ModelBackend& backend, const ReplacementProposer& proposer,
                const TokenSequence& seq, std::size_t target_pos,
                const ImportanceState& state, const ReAGentConfig& cfg, Rng& rng) {
  check_target(seq, target_pos);
  const auto context = seq.context(target_pos);
  if (state.size() != context.size()) {
    throw LengthMismatchError("importance state does not cover the context");
  }
  ReplacementSet unimportant;
  unimportant.positions = lowest_positions(state.scores, cfg.stop_count(context.size()));
  std::sort(unimportant.positions.begin(), unimportant.positions.end());
  unimportant.ratio = static_cast<double>(unimportant.positions.size()) /
                      static_cast<double>(context.size());

  VocabDistribution dist;
  if (unimportant.positions.empty()) {
    dist = backend.next_token_distribution(context);
  } else {
    const auto proposal = proposer.propose(context, unimportant, rng);
    dist = backend.next_token_distribution(
        apply_proposal(context, unimportant, proposal, seq.vocab_size()));
  }
  return rank_of(dist, seq[target_pos]) < cfg.tolerance_k;
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run_index, std::size_t target_pos) {
  return derive_seed(base_seed, {0x72756eULL, run_index, target_pos});
}

ImportanceState attribute_position(const ModelBackend& backend,
                                   const ReplacementProposer& proposer,
                                   const TokenSequence& seq, std::size_t target_pos,
                                   const ReAGentConfig& cfg, std::size_t run_index) {
  cfg.validate();
  check_target(seq, target_pos);
  check_vocab(backend, seq);
  const auto context = seq.context(target_pos);

  if (context.size() == 1) {
    ImportanceState trivial;
    trivial.logits = {0.0};
    trivial.scores = {1.0};
    trivial.converged = true;
    return trivial;
  }

  Rng rng(run_seed(cfg.seed, run_index, target_pos));
  ImportanceState state = init_importance(context.size(), rng);
  const double original = target_probability(backend, context, seq[target_pos]);

  while (true) {
    if (check_stop(backend, proposer, seq, target_pos, state, cfg, rng)) {
      state.converged = true;
      break;
    }
    if (state.step_count >= cfg.max_steps) break;
    const auto replaced = select_replacement_set(context.size(), cfg.replace_ratio, rng);
    const auto proposal = proposer.propose(context, replaced, rng);
    const double delta =
        compute_predictive_delta(backend, seq, target_pos, original, replaced, proposal);
    state = update_scores(state, delta, replaced, cfg.logit_clamp_epsilon);
  }
  return state;
}

PositionAttribution attribute_averaged(const ModelBackend& backend,
                                       const ReplacementProposer& proposer,
                                       const TokenSequence& seq, std::size_t target_pos,
                                       const ReAGentConfig& cfg) {
  cfg.validate();
  PositionAttribution out;
  out.target_pos = target_pos;
  out.runs.reserve(cfg.num_runs);
  for (std::size_t run = 0; run < cfg.num_runs; ++run) {
    out.runs.push_back(attribute_position(backend, proposer, seq, target_pos, cfg, run));
  }
  out.averaged = average_runs(out.runs);
  return out;
}

std::vector<std::size_t> strided_targets(std::size_t length, std::size_t stride) {
  if (stride == 0) throw ConfigError("stride must be >= 1");
  std::vector<std::size_t> out;
  for (std::size_t pos = 1; pos < length; pos += stride) out.push_back(pos);
  return out;
}

std::vector<PositionAttribution> attribute_sequence(const ModelBackend& backend,
                                                    const ReplacementProposer& proposer,
                                                    const TokenSequence& seq,
                                                    const ReAGentConfig& cfg,
                                                    std::size_t stride) {
  std::vector<PositionAttribution> out;
  for (std::size_t pos : strided_targets(seq.size(), stride)) {
    out.push_back(attribute_averaged(backend, proposer, seq, pos, cfg));
  }
  return out;
}

}  // namespace reagent
