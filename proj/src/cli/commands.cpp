#include "reagent/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "reagent/backend/remote_backend.hpp"
#include "reagent/backend/toy_lm.hpp"
#include "reagent/cli/records.hpp"
#include "reagent/core/reagent.hpp"
#include "reagent/errors.hpp"
#include "reagent/eval/agreement.hpp"
#include "reagent/eval/faithfulness.hpp"
#include "reagent/rng.hpp"

namespace reagent::cli {

namespace fs = std::filesystem;
using nlohmann::json;

BackendSpec BackendSpec::parse(const std::string& descriptor, std::uint64_t model_seed) {
  BackendSpec spec;
  spec.model_seed = model_seed;
  if (descriptor == "toy") {
    spec.kind = Kind::kToy;
  } else if (descriptor == "toy-planted") {
    spec.kind = Kind::kToyPlanted;
  } else if (descriptor.rfind("http://", 0) == 0 || descriptor.rfind("https://", 0) == 0) {
    spec.kind = Kind::kRemote;
    spec.url = descriptor;
    while (!spec.url.empty() && spec.url.back() == '/') spec.url.pop_back();
  } else {
    throw ConfigError("backend must be 'toy', 'toy-planted' or an http(s) URL, got '" +
                      descriptor + "'");
  }
  return spec;
}

std::string BackendSpec::describe() const {
  switch (kind) {
    case Kind::kToy:
      return "toy:" + std::to_string(model_seed);
    case Kind::kToyPlanted:
      return "toy-planted:" + std::to_string(model_seed);
    case Kind::kRemote:
      return url;
  }
  return "?";
}

void RunConfig::validate() const {
  reagent.validate();
  if (stride == 0) throw ConfigError("--stride must be >= 1");
  if (samples == 0) throw ConfigError("--samples must be >= 1");
  if (workers == 0) throw ConfigError("--workers must be >= 1");
  if (fill_temperature < 0.0) throw ConfigError("--fill-temperature must be >= 0");
  if (out_dir.empty()) throw ConfigError("--out is required");
}

namespace {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 12);
}

json attribution_settings(const RunConfig& cfg) {
  const auto& r = cfg.reagent;
  return {{"backend", cfg.backend.describe()},
          {"strategy", to_string(cfg.strategy)},
          {"fill_temperature", cfg.fill_temperature},
          {"replace_ratio", r.replace_ratio},
          {"stop_replace_fraction", r.stop_replace_fraction},
          {"stop_replace_count", r.stop_replace_count ? json(*r.stop_replace_count) : json()},
          {"tolerance_k", r.tolerance_k},
          {"max_steps", r.max_steps},
          {"num_runs", r.num_runs},
          {"logit_clamp_epsilon", r.logit_clamp_epsilon},
          {"seed", cfg.seed},
          {"stride", cfg.stride}};
}

std::string input_stem(const RunConfig& cfg) {
  const std::string stem = cfg.input.stem().string();
  return stem.empty() ? "input" : stem;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  const std::size_t n = std::min(workers, count);
  if (n <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
}

std::vector<std::size_t> targets_for(const InputRecord& record, std::size_t stride) {
  auto targets = strided_targets(record.tokens.size(), stride);
  if (record.annotation) {
    const std::size_t t = record.agreement_target();
    if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
      targets.insert(std::upper_bound(targets.begin(), targets.end(), t), t);
    }
  }
  return targets;
}

std::vector<std::string> surfaces(const TokenSequence& seq) {
  std::vector<std::string> out(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) out[i] = seq.surface(i);
  return out;
}

// Renders every target of every record into one file per format.
void write_heatmaps(const RunConfig& cfg, const std::vector<AttributionRecord>& records) {
  for (HeatmapFormat format : cfg.render) {
    std::vector<std::string> blocks;
    for (const auto& rec : records) {
      const TokenSequence seq(rec.input.tokens, rec.vocab_size, rec.input.surface);
      const auto words = surfaces(seq);
      for (const auto& t : rec.targets) {
        const std::span<const std::string> context(words.data(), t.target_pos);
        const std::string heat =
            render_heatmap(context, t.averaged.scores, format, words[t.target_pos]);
        std::string title = rec.input.id + " @ " + std::to_string(t.target_pos) +
                            (t.averaged.converged ? "" : " (not converged)");
        if (format == HeatmapFormat::kHtml) {
          blocks.push_back("<h3>" + html_escape(title) + "</h3>\n" + heat);
        } else {
          blocks.push_back(title + "\n" + heat);
        }
      }
    }
    std::ofstream out(heatmap_path(cfg, format), std::ios::binary);
    if (format == HeatmapFormat::kHtml) {
      out << html_document("importance heatmaps: " + input_stem(cfg), blocks);
    } else {
      for (const auto& b : blocks) out << b << "\n\n";
    }
  }
}

}  // namespace

std::string attribution_hash(const RunConfig& cfg) {
  return fnv1a_hex(attribution_settings(cfg).dump());
}

std::string report_hash(const RunConfig& cfg) {
  json j = attribution_settings(cfg);
  j["samples"] = cfg.samples;
  return fnv1a_hex(j.dump());
}

fs::path attribution_path(const RunConfig& cfg) {
  return cfg.out_dir / (input_stem(cfg) + "." + attribution_hash(cfg) + ".attributions.jsonl");
}

fs::path report_path(const RunConfig& cfg) {
  return cfg.out_dir / (input_stem(cfg) + "." + report_hash(cfg) + ".report.jsonl");
}

fs::path heatmap_path(const RunConfig& cfg, HeatmapFormat format) {
  return cfg.out_dir / (input_stem(cfg) + "." + attribution_hash(cfg) +
                        (format == HeatmapFormat::kHtml ? ".heatmap.html" : ".heatmap.ansi"));
}

BackendBundle make_backend(const RunConfig& cfg, std::ostream& log) {
  BackendBundle bundle;
  std::shared_ptr<const FillSource> fills;
  std::optional<PosTagTable> tags;
  const std::uint64_t seed = cfg.backend.model_seed;

  switch (cfg.backend.kind) {
    case BackendSpec::Kind::kToy: {
      ToyLmOptions opts;
      opts.seed = seed;
      bundle.backend = std::make_shared<ToyLM>(opts);
      fills = std::make_shared<ToyFillModel>(opts.vocab_size, derive_seed(seed, {0x66696c6cULL}));
      tags = PosTagTable::toy(opts.vocab_size, seed);
      break;
    }
    case BackendSpec::Kind::kToyPlanted: {
      PlantedOptions opts;
      opts.base.seed = seed;
      auto planted = std::make_shared<PlantedDependencyLM>(opts);
      fills = std::make_shared<ToyFillModel>(planted->vocab_size(),
                                             derive_seed(seed, {0x66696c6cULL}),
                                             std::vector<TokenId>{opts.key_token, opts.target_token});
      tags = PosTagTable::toy(planted->vocab_size(), seed);
      bundle.backend = std::move(planted);
      break;
    }
    case BackendSpec::Kind::kRemote: {
      RemoteOptions opts;
      opts.auth_token = cfg.auth_token;
      opts.pool_size = std::max<std::size_t>(cfg.workers, 1);
      auto remote = std::make_shared<RemoteBackend>(cfg.backend.url, opts);
      if (cfg.strategy == ReplacementStrategy::kMaskedLm) {
        if (cfg.fill_temperature > 0.0) {
          throw ConfigError("remote fill endpoint only supports top-1 fills");
        }
        try {
          Rng probe_rng(0);
          const std::vector<TokenId> probe{0, 0};
          const std::vector<std::size_t> at{0};
          remote->fill(probe, at, 0.0, probe_rng);
          fills = remote;
        } catch (const StrategyUnavailableError& e) {
          log << "warning: " << e.what() << "\n";
        }
      } else if (cfg.strategy == ReplacementStrategy::kPosMatched) {
        try {
          tags = remote->pos_tags();
        } catch (const StrategyUnavailableError& e) {
          log << "warning: " << e.what() << "\n";
        }
      }
      bundle.backend = std::move(remote);
      break;
    }
  }

  const std::size_t vocab = bundle.backend->vocab_size();
  if (cfg.strategy == ReplacementStrategy::kMaskedLm && fills) {
    bundle.proposer = std::make_shared<MaskedLmProposer>(fills, cfg.fill_temperature);
  } else if (cfg.strategy == ReplacementStrategy::kPosMatched && tags) {
    bundle.proposer = std::make_shared<PosMatchedProposer>(*tags);
  } else if (cfg.strategy == ReplacementStrategy::kRandomVocab) {
    bundle.proposer = std::make_shared<RandomVocabProposer>(vocab);
  } else {
    log << "warning: strategy " << to_string(cfg.strategy)
        << " unavailable on this backend, falling back to random-vocab\n";
    bundle.proposer = std::make_shared<RandomVocabProposer>(vocab);
    bundle.fell_back = true;
  }
  return bundle;
}

int cmd_attribute(const RunConfig& cfg_in, std::ostream& log) {
  RunConfig cfg = cfg_in;
  cfg.reagent.seed = cfg.seed;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfigInvalid;
  }
  if (cfg.input.empty() || !fs::is_regular_file(cfg.input)) {
    log << "error: input file '" << cfg.input.string() << "' not found\n";
    return kExitMissingInputs;
  }

  std::ifstream in(cfg.input, std::ios::binary);
  ParsedInput parsed = parse_input(in);
  for (const auto& w : parsed.warnings) log << "warning: skipping " << w << "\n";
  if (parsed.records.empty()) {
    log << "error: no usable records in '" << cfg.input.string() << "'\n";
    return kExitMissingInputs;
  }

  BackendBundle bundle;
  try {
    bundle = make_backend(cfg, log);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfigInvalid;
  } catch (const TransportError& e) {
    log << "error: backend unreachable after " << e.attempts() << " attempt(s): " << e.what()
        << "\n";
    return kExitBackendUnreachable;
  } catch (const BackendError& e) {
    log << "error: backend misbehaves: " << e.what() << "\n";
    return kExitBackendUnreachable;
  }
  const std::size_t vocab = bundle.backend->vocab_size();

  std::vector<std::optional<AttributionRecord>> results(parsed.records.size());
  std::vector<std::string> failures(parsed.records.size());
  std::atomic<bool> transport_failed{false};

  parallel_for(parsed.records.size(), cfg.workers, [&](std::size_t i) {
    if (transport_failed) return;
    const InputRecord& input = parsed.records[i];
    try {
      const TokenSequence seq(input.tokens, vocab, input.surface);
      AttributionRecord rec;
      rec.input = input;
      rec.vocab_size = vocab;
      for (std::size_t pos : targets_for(input, cfg.stride)) {
        rec.targets.push_back(
            attribute_averaged(*bundle.backend, *bundle.proposer, seq, pos, cfg.reagent));
      }
      results[i] = std::move(rec);
    } catch (const TransportError& e) {
      transport_failed = true;
      failures[i] = e.what();
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i].empty()) {
      log << "warning: record '" << parsed.records[i].id << "' skipped: " << failures[i] << "\n";
    }
  }
  if (transport_failed) {
    log << "error: lost contact with backend\n";
    return kExitBackendUnreachable;
  }

  std::vector<AttributionRecord> done;
  for (auto& r : results) {
    if (r) done.push_back(std::move(*r));
  }
  if (done.empty()) {
    log << "error: every record failed\n";
    return kExitFailure;
  }

  fs::create_directories(cfg.out_dir);
  {
    std::ofstream out(attribution_path(cfg), std::ios::binary);
    for (const auto& rec : done) out << to_json(rec).dump() << "\n";
  }
  write_heatmaps(cfg, done);
  log << "wrote " << done.size() << " attribution record(s) to " << attribution_path(cfg).string()
      << "\n";
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg_in, std::ostream& log) {
  RunConfig cfg = cfg_in;
  cfg.reagent.seed = cfg.seed;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfigInvalid;
  }
  const fs::path source = cfg.attributions.value_or(attribution_path(cfg));
  if (!fs::is_regular_file(source)) {
    log << "error: attribution file '" << source.string() << "' not found\n";
    return kExitMissingInputs;
  }

  std::vector<AttributionRecord> records;
  {
    std::ifstream in(source, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        records.push_back(parse_attribution_record(json::parse(line)));
      } catch (const std::exception& e) {
        log << "warning: skipping attribution line " << line_no << ": " << e.what() << "\n";
      }
    }
  }
  if (records.empty()) {
    log << "error: no attribution records in '" << source.string() << "'\n";
    return kExitMissingInputs;
  }

  BackendBundle bundle;
  try {
    bundle = make_backend(cfg, log);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfigInvalid;
  } catch (const TransportError& e) {
    log << "error: backend unreachable: " << e.what() << "\n";
    return kExitBackendUnreachable;
  } catch (const BackendError& e) {
    log << "error: backend misbehaves: " << e.what() << "\n";
    return kExitBackendUnreachable;
  }
  const std::size_t vocab = bundle.backend->vocab_size();

  std::vector<std::optional<FaithfulnessReport>> reports(records.size());
  std::vector<std::string> failures(records.size());
  std::atomic<bool> transport_failed{false};
  parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
    if (transport_failed) return;
    const auto& rec = records[i];
    try {
      if (rec.vocab_size != vocab) throw VocabularyError("attribution vocabulary differs from backend");
      if (rec.targets.empty()) throw EmptyReportError("record has no attributed targets");
      const TokenSequence seq(rec.input.tokens, vocab, rec.input.surface);
      reports[i] = evaluate_against_random(*bundle.backend, seq, rec.targets, cfg.samples, cfg.seed);
    } catch (const TransportError& e) {
      transport_failed = true;
      failures[i] = e.what();
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i].empty()) {
      log << "warning: record '" << records[i].input.id << "' not evaluated: " << failures[i] << "\n";
    }
  }
  if (transport_failed) return kExitBackendUnreachable;

  std::vector<std::vector<std::size_t>> rationales;
  std::vector<AgreementAnnotation> annotations;
  for (const auto& rec : records) {
    if (!rec.input.annotation) continue;
    const std::size_t target = rec.input.agreement_target();
    const auto it = std::find_if(rec.targets.begin(), rec.targets.end(),
                                 [&](const auto& t) { return t.target_pos == target; });
    if (it == rec.targets.end()) continue;
    rationales.push_back(extract_rationale(it->averaged.scores, rec.input.annotation->rationale_length));
    annotations.push_back(*rec.input.annotation);
  }

  fs::create_directories(cfg.out_dir);
  std::size_t written = 0;
  {
    std::ofstream out(report_path(cfg), std::ios::binary);
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!reports[i]) continue;
      for (const auto& line : report_lines(records[i].input.id, *reports[i])) {
        out << line.dump() << "\n";
      }
      ++written;
    }
    if (!annotations.empty()) {
      out << agreement_line(agreement_ratios(rationales, annotations), annotations.size()).dump()
          << "\n";
    }
  }
  if (written == 0) {
    log << "error: no record could be evaluated\n";
    return kExitFailure;
  }
  log << "wrote " << written << " report(s) to " << report_path(cfg).string() << "\n";
  return kExitOk;
}

}  // namespace reagent::cli
