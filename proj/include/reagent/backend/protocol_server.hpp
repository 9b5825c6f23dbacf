#pragma once

#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "reagent/backend/model_backend.hpp"
#include "reagent/backend/proposer.hpp"

namespace httplib {
class Server;
}

namespace reagent {

/// Serves any ModelBackend over the wire protocol. Used to expose the toy
/// models to remote clients and in tests.
class ProtocolServer {
 public:
  ProtocolServer(std::shared_ptr<const ModelBackend> backend,
                 std::shared_ptr<const FillSource> fills = nullptr,
                 std::optional<PosTagTable> tags = std::nullopt);
  ~ProtocolServer();

  ProtocolServer(const ProtocolServer&) = delete;
  ProtocolServer& operator=(const ProtocolServer&) = delete;

  /// Binds and serves on a background thread. port 0 picks a free port.
  /// Returns the bound port; throws Error if binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

  std::string url() const;

  /// Requests must then carry "Authorization: Bearer <token>". Call before start().
  void require_token(std::string token);

 private:
  void install_routes();

  std::shared_ptr<const ModelBackend> backend_;
  std::shared_ptr<const FillSource> fills_;
  std::optional<PosTagTable> tags_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string token_;
  std::string host_;
  int port_ = 0;
};

}  // namespace reagent
