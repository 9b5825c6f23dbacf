#pragma once

// JSON bodies of the model-oracle wire protocol.
//
//   POST /v1/next   {"tokens": [int...]}                              -> {"probs": [float...]}
//   POST /v1/masked {"tokens": [int...], "retain": [float...], "seed": int} -> {"probs": [float...]}
//   POST /v1/fill   {"tokens": [int...], "mask_positions": [int...]}  -> {"fills": {"<pos>": int}}
//   GET  /v1/info   -> {"vocab_size": int, "model_name": str, "pos_tags": bool[, "pos_table": [int...]]}
//
// Errors are non-2xx with {"error": str, "retryable": bool}.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reagent/types.hpp"

namespace reagent::protocol {

inline constexpr const char* kNextPath = "/v1/next";
inline constexpr const char* kMaskedPath = "/v1/masked";
inline constexpr const char* kFillPath = "/v1/fill";
inline constexpr const char* kInfoPath = "/v1/info";

struct NextRequest {
  std::vector<TokenId> tokens;
};

struct MaskedRequest {
  std::vector<TokenId> tokens;
  std::vector<double> retain;
  std::uint64_t seed = 0;
};

struct FillRequest {
  std::vector<TokenId> tokens;
  std::vector<std::size_t> mask_positions;
};

struct ProbsResponse {
  std::vector<double> probs;
};

struct FillResponse {
  std::map<std::size_t, TokenId> fills;
};

struct InfoResponse {
  std::size_t vocab_size = 0;
  std::string model_name;
  bool pos_tags = false;
  std::optional<std::vector<int>> pos_table;
};

struct ErrorBody {
  std::string error;
  bool retryable = false;
};

// Decoders throw nlohmann::json exceptions on missing or mistyped fields.
nlohmann::json to_json(const NextRequest& r);
nlohmann::json to_json(const MaskedRequest& r);
nlohmann::json to_json(const FillRequest& r);
nlohmann::json to_json(const ProbsResponse& r);
nlohmann::json to_json(const FillResponse& r);
nlohmann::json to_json(const InfoResponse& r);
nlohmann::json to_json(const ErrorBody& r);

NextRequest parse_next_request(const nlohmann::json& j);
MaskedRequest parse_masked_request(const nlohmann::json& j);
FillRequest parse_fill_request(const nlohmann::json& j);
ProbsResponse parse_probs_response(const nlohmann::json& j);
FillResponse parse_fill_response(const nlohmann::json& j);
InfoResponse parse_info_response(const nlohmann::json& j);
ErrorBody parse_error_body(const nlohmann::json& j);

}  // namespace reagent::protocol
