#include "reagent/backend/protocol_server.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "reagent/backend/protocol.hpp"
#include "reagent/errors.hpp"

namespace reagent {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message, bool retryable) {
  reply(res, protocol::to_json(protocol::ErrorBody{message, retryable}), status);
}

// Maps request-level failures onto the protocol's error envelope.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const json::exception& e) {
      reply_error(res, 400, std::string("bad request: ") + e.what(), false);
    } catch (const VocabularyError& e) {
      reply_error(res, 400, e.what(), false);
    } catch (const LengthMismatchError& e) {
      reply_error(res, 400, e.what(), false);
    } catch (const ConfigError& e) {
      reply_error(res, 400, e.what(), false);
    } catch (const EmptyContextError& e) {
      reply_error(res, 400, e.what(), false);
    } catch (const MalformedProposalError& e) {
      reply_error(res, 400, e.what(), false);
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what(), true);
    }
  };
}

}  // namespace

ProtocolServer::ProtocolServer(std::shared_ptr<const ModelBackend> backend,
                               std::shared_ptr<const FillSource> fills,
                               std::optional<PosTagTable> tags)
    : backend_(std::move(backend)),
      fills_(std::move(fills)),
      tags_(std::move(tags)),
      server_(std::make_unique<httplib::Server>()) {
  server_->set_tcp_nodelay(true);
  if (!backend_) throw ConfigError("protocol server needs a backend");
  install_routes();
}

ProtocolServer::~ProtocolServer() { stop(); }

void ProtocolServer::require_token(std::string token) { token_ = std::move(token); }

void ProtocolServer::install_routes() {
  server_->set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (token_.empty() || req.get_header_value("Authorization") == "Bearer " + token_) {
      return httplib::Server::HandlerResponse::Unhandled;
    }
    reply_error(res, 401, "missing or invalid token", false);
    return httplib::Server::HandlerResponse::Handled;
  });

  server_->Get(protocol::kInfoPath, guarded([this](const httplib::Request&, httplib::Response& res) {
    protocol::InfoResponse info;
    info.vocab_size = backend_->vocab_size();
    info.model_name = backend_->name();
    info.pos_tags = tags_.has_value();
    if (tags_) info.pos_table = tags_->tag_of;
    reply(res, protocol::to_json(info));
  }));

  server_->Post(protocol::kNextPath,
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto r = protocol::parse_next_request(json::parse(req.body));
                  const auto dist = backend_->next_token_distribution(r.tokens);
                  reply(res, protocol::to_json(protocol::ProbsResponse{dist.probs}));
                }));

  server_->Post(protocol::kMaskedPath,
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto r = protocol::parse_masked_request(json::parse(req.body));
                  const auto dist = backend_->masked_distribution(r.tokens, r.retain, r.seed);
                  reply(res, protocol::to_json(protocol::ProbsResponse{dist.probs}));
                }));

  server_->Post(protocol::kFillPath,
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  if (!fills_) {
                    reply_error(res, 501, "no fill model configured", false);
                    return;
                  }
                  const auto r = protocol::parse_fill_request(json::parse(req.body));
                  validate_context(r.tokens, backend_->vocab_size());
                  Rng unused(0);
                  const auto fills = fills_->fill(r.tokens, r.mask_positions, 0.0, unused);
                  reply(res, protocol::to_json(protocol::FillResponse{fills}));
                }));
}

int ProtocolServer::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ProtocolServer::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void ProtocolServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string ProtocolServer::url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

}  // namespace reagent
