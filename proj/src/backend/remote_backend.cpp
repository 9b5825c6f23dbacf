#include "reagent/backend/remote_backend.hpp"

#include <httplib.h>

#include <string>
#include <thread>

#include "reagent/errors.hpp"

namespace reagent {

using nlohmann::json;

class RemoteBackend::ClientPool {
 public:
  ClientPool(const std::string& url, const RemoteOptions& options) {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, options.pool_size); ++i) {
      auto client = std::make_unique<httplib::Client>(url);
      if (!client->is_valid()) throw ConfigError("invalid backend URL '" + url + "'");
      client->set_connection_timeout(options.connect_timeout);
      client->set_read_timeout(options.read_timeout);
      client->set_keep_alive(true);
      client->set_tcp_nodelay(true);
      if (!options.auth_token.empty()) client->set_bearer_token_auth(options.auth_token);
      idle_.push_back(std::move(client));
    }
  }

  class Lease {
   public:
    Lease(ClientPool& pool, std::unique_ptr<httplib::Client> client)
        : pool_(pool), client_(std::move(client)) {}
    ~Lease() { pool_.release(std::move(client_)); }
    Lease(const Lease&) = delete;
    Lease& operator=(const Lease&) = delete;
    httplib::Client* operator->() { return client_.get(); }

   private:
    ClientPool& pool_;
    std::unique_ptr<httplib::Client> client_;
  };

  Lease acquire() {
    std::unique_lock lock(mutex_);
    available_.wait(lock, [&] { return !idle_.empty(); });
    auto client = std::move(idle_.back());
    idle_.pop_back();
    return Lease(*this, std::move(client));
  }

 private:
  void release(std::unique_ptr<httplib::Client> client) {
    {
      std::lock_guard lock(mutex_);
      idle_.push_back(std::move(client));
    }
    available_.notify_one();
  }

  std::mutex mutex_;
  std::condition_variable available_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
};

namespace {

template <typename Call>
json with_retries(const RemoteOptions& options, const std::string& what, Call call) {
  std::string last_error;
  int last_status = 0;
  bool last_retryable = true;
  const int attempts = std::max(1, options.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(options.retry_backoff * (1 << (attempt - 2)));
    httplib::Result res = call();
    if (!res) {
      last_error = what + ": " + httplib::to_string(res.error());
      last_status = 0;
      last_retryable = true;
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw BackendError(what + ": malformed response body: " + e.what());
      }
    }
    last_status = res->status;
    last_retryable = res->status >= 500;
    last_error = what + ": HTTP " + std::to_string(res->status);
    try {
      const auto body = protocol::parse_error_body(json::parse(res->body));
      last_retryable = body.retryable;
      last_error += ": " + body.error;
    } catch (const json::exception&) {
    }
    if (!last_retryable) throw TransportError(last_error, false, attempt, last_status);
  }
  throw TransportError(last_error, last_retryable, attempts, last_status);
}

}  // namespace

RemoteBackend::RemoteBackend(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)),
      options_(std::move(options)),
      pool_(std::make_unique<ClientPool>(base_url_, options_)) {
  try {
    info_ = protocol::parse_info_response(get(protocol::kInfoPath));
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed /v1/info response: ") + e.what());
  }
  if (info_.vocab_size == 0) throw BackendError("backend reports an empty vocabulary");
  if (info_.pos_table && info_.pos_table->size() != info_.vocab_size) {
    throw BackendError("pos_table does not cover the vocabulary");
  }
}

RemoteBackend::~RemoteBackend() = default;

json RemoteBackend::get(const std::string& path) const {
  return with_retries(options_, "GET " + path, [&] {
    auto client = pool_->acquire();
    return client->Get(path);
  });
}

json RemoteBackend::post(const std::string& path, const json& body) const {
  const std::string payload = body.dump();
  return with_retries(options_, "POST " + path, [&] {
    auto client = pool_->acquire();
    return client->Post(path, payload, "application/json");
  });
}

VocabDistribution RemoteBackend::to_distribution(const json& body) const {
  VocabDistribution dist;
  try {
    dist.probs = protocol::parse_probs_response(body).probs;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed probs response: ") + e.what());
  }
  validate_distribution(dist, info_.vocab_size);
  return dist;
}

VocabDistribution RemoteBackend::next_token_distribution(std::span<const TokenId> context) const {
  validate_context(context, info_.vocab_size);
  protocol::NextRequest req{{context.begin(), context.end()}};
  return to_distribution(post(protocol::kNextPath, protocol::to_json(req)));
}

VocabDistribution RemoteBackend::masked_distribution(std::span<const TokenId> context,
                                                     std::span<const double> retention,
                                                     std::uint64_t seed) const {
  validate_context(context, info_.vocab_size);
  validate_retention(retention, context.size());
  protocol::MaskedRequest req{{context.begin(), context.end()},
                              {retention.begin(), retention.end()},
                              seed};
  return to_distribution(post(protocol::kMaskedPath, protocol::to_json(req)));
}

std::map<std::size_t, TokenId> RemoteBackend::fill(std::span<const TokenId> tokens,
                                                   std::span<const std::size_t> positions,
                                                   double temperature, Rng& /*rng*/) const {
  if (temperature > 0.0) throw ConfigError("the fill endpoint only serves top-1 fills");
  protocol::FillRequest req{{tokens.begin(), tokens.end()}, {positions.begin(), positions.end()}};
  json body;
  try {
    body = post(protocol::kFillPath, protocol::to_json(req));
  } catch (const TransportError& e) {
    if (e.status() == 404 || e.status() == 501) {
      throw StrategyUnavailableError(std::string("fill endpoint unavailable: ") + e.what());
    }
    throw;
  }
  protocol::FillResponse res;
  try {
    res = protocol::parse_fill_response(body);
  } catch (const std::exception& e) {
    throw BackendError(std::string("malformed fill response: ") + e.what());
  }
  for (const auto& [pos, tok] : res.fills) {
    if (tok < 0 || static_cast<std::size_t>(tok) >= info_.vocab_size) {
      throw BackendError("fill token outside vocabulary");
    }
  }
  return res.fills;
}

PosTagTable RemoteBackend::pos_tags() const {
  if (!info_.pos_tags || !info_.pos_table) {
    throw StrategyUnavailableError("backend does not publish part-of-speech tags");
  }
  return PosTagTable{*info_.pos_table};
}

}  // namespace reagent
