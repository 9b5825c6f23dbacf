#include "reagent/backend/protocol.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "reagent/backend/protocol_server.hpp"
#include "reagent/backend/remote_backend.hpp"
#include "reagent/backend/toy_lm.hpp"
#include "reagent/errors.hpp"

namespace reagent {
namespace {

using nlohmann::json;

json fixture() {
  std::ifstream in(std::string(REAGENT_FIXTURE_DIR) + "/protocol_messages.json");
  return json::parse(in);
}

RemoteOptions quick_options() {
  RemoteOptions o;
  o.retry_backoff = std::chrono::milliseconds(5);
  o.connect_timeout = std::chrono::milliseconds(500);
  return o;
}

TEST(Messages, FixtureRoundTrips) {
  const auto f = fixture();
  EXPECT_EQ(protocol::to_json(protocol::parse_next_request(f["next_request"])), f["next_request"]);
  EXPECT_EQ(protocol::to_json(protocol::parse_masked_request(f["masked_request"])),
            f["masked_request"]);
  EXPECT_EQ(protocol::to_json(protocol::parse_fill_request(f["fill_request"])), f["fill_request"]);
  EXPECT_EQ(protocol::to_json(protocol::parse_probs_response(f["probs_response"])),
            f["probs_response"]);
  EXPECT_EQ(protocol::to_json(protocol::parse_fill_response(f["fill_response"])),
            f["fill_response"]);
  EXPECT_EQ(protocol::to_json(protocol::parse_info_response(f["info_response"])),
            f["info_response"]);
  EXPECT_EQ(protocol::to_json(protocol::parse_info_response(f["info_response_plain"])),
            f["info_response_plain"]);
  EXPECT_EQ(protocol::to_json(protocol::parse_error_body(f["error_body"])), f["error_body"]);
}

TEST(Messages, DecodedValues) {
  const auto f = fixture();
  const auto m = protocol::parse_masked_request(f["masked_request"]);
  EXPECT_EQ(m.seed, 12345678901ULL);
  EXPECT_EQ(m.retain, (std::vector<double>{1.0, 0.25, 0.0}));
  const auto fill = protocol::parse_fill_response(f["fill_response"]);
  EXPECT_EQ(fill.fills.at(1), 22);
  EXPECT_EQ(fill.fills.at(3), 7);
  EXPECT_FALSE(protocol::parse_info_response(f["info_response_plain"]).pos_table.has_value());
}

TEST(Messages, MissingFieldsThrow) {
  EXPECT_THROW(protocol::parse_masked_request(json{{"tokens", {1}}}), json::exception);
  EXPECT_THROW(protocol::parse_probs_response(json{{"prob", {0.5}}}), json::exception);
  EXPECT_THROW(protocol::parse_next_request(json{{"tokens", "abc"}}), json::exception);
}

class ServedToy : public ::testing::Test {
 protected:
  void SetUp() override {
    model_ = std::make_shared<ToyLM>();
    fills_ = std::make_shared<ToyFillModel>(64, 3);
    server_ = std::make_unique<ProtocolServer>(model_, fills_, PosTagTable::toy(64, 1));
    server_->start();
  }
  void TearDown() override { server_->stop(); }

  std::shared_ptr<ToyLM> model_;
  std::shared_ptr<ToyFillModel> fills_;
  std::unique_ptr<ProtocolServer> server_;
};

TEST_F(ServedToy, InfoDescribesTheModel) {
  RemoteBackend remote(server_->url(), quick_options());
  EXPECT_EQ(remote.vocab_size(), 64u);
  EXPECT_EQ(remote.name(), model_->name());
  EXPECT_EQ(remote.pos_tags().tag_of, PosTagTable::toy(64, 1).tag_of);
}

TEST_F(ServedToy, RemoteMatchesLocalBitForBit) {
  RemoteBackend remote(server_->url(), quick_options());
  const std::vector<TokenId> ctx{3, 14, 15, 9, 26};
  EXPECT_EQ(remote.next_token_distribution(ctx).probs, model_->next_token_distribution(ctx).probs);
  const std::vector<double> retain{0.9, 0.1, 0.5, 0.0, 1.0};
  EXPECT_EQ(remote.masked_distribution(ctx, retain, 77).probs,
            model_->masked_distribution(ctx, retain, 77).probs);
}

TEST_F(ServedToy, FillMatchesLocalGreedyFill) {
  RemoteBackend remote(server_->url(), quick_options());
  const std::vector<TokenId> ctx{3, 14, 15, 9, 26};
  const std::vector<std::size_t> positions{1, 3};
  Rng rng(0);
  EXPECT_EQ(remote.fill(ctx, positions, 0.0, rng), fills_->fill(ctx, positions, 0.0, rng));
  EXPECT_THROW(remote.fill(ctx, positions, 1.0, rng), ConfigError);
}

TEST_F(ServedToy, ConcurrentCallsShareThePool) {
  RemoteOptions o = quick_options();
  o.pool_size = 2;
  RemoteBackend remote(server_->url(), o);
  std::atomic<int> mismatches{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&, t] {
      const std::vector<TokenId> ctx{t, t + 1, t + 2};
      for (int i = 0; i < 10; ++i) {
        if (remote.next_token_distribution(ctx).probs != model_->next_token_distribution(ctx).probs) {
          ++mismatches;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(mismatches.load(), 0);
}

TEST_F(ServedToy, BadRequestsAreNotRetryable) {
  httplib::Client raw(server_->url());
  auto res = raw.Post("/v1/next", R"({"tokens": [1, 999]})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  const auto body = protocol::parse_error_body(json::parse(res->body));
  EXPECT_FALSE(body.retryable);
  res = raw.Post("/v1/masked", "not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST_F(ServedToy, ResponsesAreGzipped) {
  httplib::Client raw(server_->url());
  raw.set_decompress(false);
  auto res = raw.Post("/v1/next", httplib::Headers{{"Accept-Encoding", "gzip"}},
                      R"({"tokens": [1, 2, 3]})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->get_header_value("Content-Encoding"), "gzip");
}

TEST(ServerWithoutFill, FillIsUnavailable) {
  ProtocolServer server(std::make_shared<ToyLM>());
  server.start();
  {
    RemoteBackend remote(server.url(), quick_options());
    const std::vector<TokenId> ctx{1, 2, 3};
    const std::vector<std::size_t> positions{1};
    Rng rng(0);
    EXPECT_THROW(remote.fill(ctx, positions, 0.0, rng), StrategyUnavailableError);
    EXPECT_THROW(remote.pos_tags(), StrategyUnavailableError);
  }
  server.stop();
}

TEST(Auth, TokenRequired) {
  ProtocolServer server(std::make_shared<ToyLM>());
  server.require_token("s3cret");
  server.start();
  try {
    RemoteBackend anonymous(server.url(), quick_options());
    ADD_FAILURE() << "expected a 401";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 401);
    EXPECT_FALSE(e.retryable());
    EXPECT_EQ(e.attempts(), 1);
  }
  RemoteOptions o = quick_options();
  o.auth_token = "s3cret";
  {
    RemoteBackend authorised(server.url(), o);
    EXPECT_EQ(authorised.vocab_size(), 64u);
  }
  server.stop();
}

TEST(Retries, TransientFailuresAreRetried) {
  httplib::Server flaky;
  std::atomic<int> calls{0};
  flaky.Get("/v1/info", [&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      res.set_content(R"({"error": "warming up", "retryable": true})", "application/json");
      return;
    }
    res.set_content(R"({"vocab_size": 8, "model_name": "flaky", "pos_tags": false})",
                    "application/json");
  });
  const int port = flaky.bind_to_any_port("127.0.0.1");
  std::thread th([&] { flaky.listen_after_bind(); });
  flaky.wait_until_ready();

  {
    RemoteBackend remote("http://127.0.0.1:" + std::to_string(port), quick_options());
    EXPECT_EQ(remote.vocab_size(), 8u);
    EXPECT_EQ(calls.load(), 3);
  }

  flaky.stop();
  th.join();
}

TEST(Retries, GiveUpAfterMaxAttempts) {
  httplib::Server broken;
  std::atomic<int> calls{0};
  broken.Get("/v1/info", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  const int port = broken.bind_to_any_port("127.0.0.1");
  std::thread th([&] { broken.listen_after_bind(); });
  broken.wait_until_ready();

  RemoteOptions o = quick_options();
  o.max_attempts = 4;
  try {
    RemoteBackend remote("http://127.0.0.1:" + std::to_string(port), o);
    ADD_FAILURE() << "expected failure";
  } catch (const TransportError& e) {
    EXPECT_TRUE(e.retryable());
    EXPECT_EQ(e.attempts(), 4);
    EXPECT_EQ(e.status(), 500);
  }
  EXPECT_EQ(calls.load(), 4);
  broken.stop();
  th.join();
}

TEST(Retries, UnreachableServer) {
  // Port 1 is privileged and unused here, so the connection is refused.
  RemoteOptions o = quick_options();
  o.max_attempts = 2;
  try {
    RemoteBackend remote("http://127.0.0.1:1", o);
    ADD_FAILURE() << "expected failure";
  } catch (const TransportError& e) {
    EXPECT_TRUE(e.retryable());
    EXPECT_EQ(e.attempts(), 2);
    EXPECT_EQ(e.status(), 0);
  }
}

TEST(Remote, MalformedDistributionRejected) {
  httplib::Server odd;
  odd.Get("/v1/info", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"vocab_size": 4, "model_name": "odd", "pos_tags": false})",
                    "application/json");
  });
  odd.Post("/v1/next", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"probs": [0.5, 0.5, 0.5, 0.5]})", "application/json");
  });
  const int port = odd.bind_to_any_port("127.0.0.1");
  std::thread th([&] { odd.listen_after_bind(); });
  odd.wait_until_ready();
  {
    RemoteBackend remote("http://127.0.0.1:" + std::to_string(port), quick_options());
    EXPECT_THROW(remote.next_token_distribution(std::vector<TokenId>{1, 2}), BackendError);
  }
  odd.stop();
  th.join();
}

}  // namespace
}  // namespace reagent
