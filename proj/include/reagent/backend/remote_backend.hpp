#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reagent/backend/model_backend.hpp"
#include "reagent/backend/protocol.hpp"
#include "reagent/backend/proposer.hpp"

namespace httplib {
class Client;
}

namespace reagent {

struct RemoteOptions {
  std::size_t pool_size = 4;
  int max_attempts = 3;
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{30000};
  std::chrono::milliseconds retry_backoff{50};
  /// Sent as "Authorization: Bearer <token>" when non-empty.
  std::string auth_token;
};

/// Client for the wire protocol. Probes /v1/info on construction, so a
/// successfully built instance has reached the server at least once.
class RemoteBackend : public ModelBackend, public FillSource {
 public:
  explicit RemoteBackend(std::string base_url, RemoteOptions options = {});
  ~RemoteBackend() override;

  RemoteBackend(const RemoteBackend&) = delete;
  RemoteBackend& operator=(const RemoteBackend&) = delete;

  std::size_t vocab_size() const override { return info_.vocab_size; }
  std::string name() const override { return info_.model_name; }
  const protocol::InfoResponse& info() const { return info_; }

  VocabDistribution next_token_distribution(std::span<const TokenId> context) const override;
  VocabDistribution masked_distribution(std::span<const TokenId> context,
                                        std::span<const double> retention,
                                        std::uint64_t seed) const override;

  /// Top-1 fills from /v1/fill. The endpoint has no sampling, so a positive
  /// temperature is a ConfigError.
  std::map<std::size_t, TokenId> fill(std::span<const TokenId> tokens,
                                      std::span<const std::size_t> positions,
                                      double temperature, Rng& rng) const override;

  /// Tag table advertised by /v1/info; StrategyUnavailableError if none.
  PosTagTable pos_tags() const;

 private:
  class ClientPool;

  nlohmann::json get(const std::string& path) const;
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
  VocabDistribution to_distribution(const nlohmann::json& body) const;

  std::string base_url_;
  RemoteOptions options_;
  std::unique_ptr<ClientPool> pool_;
  protocol::InfoResponse info_;
};

}  // namespace reagent
