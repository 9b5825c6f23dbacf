#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "reagent/backend/model_backend.hpp"
#include "reagent/backend/proposer.hpp"
#include "reagent/cli/heatmap.hpp"
#include "reagent/core/importance.hpp"

namespace reagent::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitBackendUnreachable = 2,
  kExitMissingInputs = 3,
  kExitConfigInvalid = 4,
};

/// "toy", "toy-planted", or an http(s):// endpoint.
struct BackendSpec {
  enum class Kind { kToy, kToyPlanted, kRemote };
  Kind kind = Kind::kToy;
  std::string url;
  std::uint64_t model_seed = 0;

  static BackendSpec parse(const std::string& descriptor, std::uint64_t model_seed = 0);
  std::string describe() const;
};

struct RunConfig {
  BackendSpec backend;
  ReAGentConfig reagent;
  ReplacementStrategy strategy = ReplacementStrategy::kMaskedLm;
  double fill_temperature = 0.0;
  std::size_t stride = 5;
  std::size_t samples = 30;
  std::uint64_t seed = 0;
  std::filesystem::path input;
  std::filesystem::path out_dir;
  /// Overrides the derived attribution file for `evaluate`.
  std::optional<std::filesystem::path> attributions;
  std::vector<HeatmapFormat> render{HeatmapFormat::kHtml};
  std::size_t workers = 1;
  std::string auth_token;

  /// Throws ConfigError.
  void validate() const;
};

/// Stable hex digest of everything that changes attribution output.
std::string attribution_hash(const RunConfig& cfg);
/// attribution_hash plus evaluation settings.
std::string report_hash(const RunConfig& cfg);

std::filesystem::path attribution_path(const RunConfig& cfg);
std::filesystem::path report_path(const RunConfig& cfg);
std::filesystem::path heatmap_path(const RunConfig& cfg, HeatmapFormat format);

struct BackendBundle {
  std::shared_ptr<const ModelBackend> backend;
  std::shared_ptr<const ReplacementProposer> proposer;
  /// Set when the requested strategy was unavailable and random-vocab is used.
  bool fell_back = false;
};

/// Builds (and for remote endpoints, probes) the backend plus proposer.
/// Throws TransportError if a remote endpoint cannot be reached.
BackendBundle make_backend(const RunConfig& cfg, std::ostream& log);

int cmd_attribute(const RunConfig& cfg, std::ostream& log);
int cmd_evaluate(const RunConfig& cfg, std::ostream& log);

}  // namespace reagent::cli
