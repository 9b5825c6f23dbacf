// reagent: black-box token attribution for causal language models.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>

#include "reagent/backend/protocol_server.hpp"
#include "reagent/backend/toy_lm.hpp"
#include "reagent/cli/commands.hpp"
#include "reagent/errors.hpp"
#include "reagent/rng.hpp"

namespace {

constexpr const char* kTokenEnv = "REAGENT_AUTH_TOKEN";

struct Flags {
  std::string backend = "toy";
  std::uint64_t model_seed = 0;
  std::string strategy = "masked-lm";
  std::vector<std::string> render{"html"};
  std::string input;
  std::string out = "reagent-out";
  std::string attributions;
  std::size_t stop_count = 0;
};

void add_common(CLI::App* cmd, Flags& f, reagent::cli::RunConfig& cfg) {
  cmd->add_option("--backend", f.backend, "toy | toy-planted | http(s)://host:port")
      ->capture_default_str();
  cmd->add_option("--model-seed", f.model_seed, "Seed of the toy model")->capture_default_str();
  cmd->add_option("--input", f.input, "Line-delimited JSON prompt file");
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Run seed")->capture_default_str();
  cmd->add_option("--replace-ratio", cfg.reagent.replace_ratio)->capture_default_str();
  cmd->add_option("--stop-fraction", cfg.reagent.stop_replace_fraction)->capture_default_str();
  cmd->add_option("--stop-count", f.stop_count,
                  "Replace exactly this many positions in the stopping check (0 = use fraction)");
  cmd->add_option("--tolerance-k", cfg.reagent.tolerance_k)->capture_default_str();
  cmd->add_option("--max-steps", cfg.reagent.max_steps)->capture_default_str();
  cmd->add_option("--runs", cfg.reagent.num_runs)->capture_default_str();
  cmd->add_option("--clamp-eps", cfg.reagent.logit_clamp_epsilon)->capture_default_str();
  cmd->add_option("--stride", cfg.stride)->capture_default_str();
  cmd->add_option("--samples", cfg.samples, "Bernoulli mask samples per metric")
      ->capture_default_str();
  cmd->add_option("--strategy", f.strategy, "masked-lm | random-vocab | pos-matched")
      ->capture_default_str();
  cmd->add_option("--fill-temperature", cfg.fill_temperature, "0 = top-1 fills")
      ->capture_default_str();
  cmd->add_option("--workers", cfg.workers)->capture_default_str();
}

int serve_toy(const std::string& kind, std::uint64_t seed, const std::string& host, int port) {
  std::shared_ptr<const reagent::ModelBackend> backend;
  std::vector<reagent::TokenId> banned;
  if (kind == "toy-planted") {
    reagent::PlantedOptions opts;
    opts.base.seed = seed;
    banned = {opts.key_token, opts.target_token};
    backend = std::make_shared<reagent::PlantedDependencyLM>(opts);
  } else {
    reagent::ToyLmOptions opts;
    opts.seed = seed;
    backend = std::make_shared<reagent::ToyLM>(opts);
  }
  auto fills = std::make_shared<reagent::ToyFillModel>(
      backend->vocab_size(), reagent::derive_seed(seed, {0x66696c6cULL}), banned);
  reagent::ProtocolServer server(backend, fills, reagent::PosTagTable::toy(backend->vocab_size(), seed));
  if (const char* token = std::getenv(kTokenEnv)) server.require_token(token);
  std::cerr << "serving " << backend->name() << " on " << host << ":" << port << "\n";
  server.listen(host, port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive replacement-based token attribution for causal LMs"};
  app.require_subcommand(1);

  Flags f;
  reagent::cli::RunConfig cfg;

  auto* attribute = app.add_subcommand("attribute", "Attribute every record of a prompt file");
  add_common(attribute, f, cfg);
  attribute->add_option("--render", f.render, "Heatmap formats: ansi, html")->delimiter(',');

  auto* evaluate = app.add_subcommand("evaluate", "Soft-NS/Soft-NC of existing attributions");
  add_common(evaluate, f, cfg);
  evaluate->add_option("--attributions", f.attributions,
                       "Attribution file (default: derived from --input and settings)");

  std::string serve_kind = "toy";
  std::string host = "127.0.0.1";
  int port = 8765;
  auto* serve = app.add_subcommand("serve-toy", "Serve a toy model over the wire protocol");
  serve->add_option("--model", serve_kind, "toy | toy-planted")->capture_default_str();
  serve->add_option("--model-seed", f.model_seed)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : reagent::cli::kExitConfigInvalid;
  }

  if (serve->parsed()) {
    try {
      return serve_toy(serve_kind, f.model_seed, host, port);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return reagent::cli::kExitFailure;
    }
  }

  try {
    cfg.backend = reagent::cli::BackendSpec::parse(f.backend, f.model_seed);
    cfg.strategy = reagent::parse_strategy(f.strategy);
    cfg.render.clear();
    for (const auto& r : f.render) cfg.render.push_back(reagent::cli::parse_heatmap_format(r));
    if (f.stop_count > 0) cfg.reagent.stop_replace_count = f.stop_count;
  } catch (const reagent::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return reagent::cli::kExitConfigInvalid;
  }
  cfg.input = f.input;
  cfg.out_dir = f.out;
  if (!f.attributions.empty()) cfg.attributions = f.attributions;
  if (const char* token = std::getenv(kTokenEnv)) cfg.auth_token = token;

  if (attribute->parsed()) return reagent::cli::cmd_attribute(cfg, std::cerr);
  return reagent::cli::cmd_evaluate(cfg, std::cerr);
}
