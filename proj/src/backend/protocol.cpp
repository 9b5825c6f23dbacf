#include "reagent/backend/protocol.hpp"

#include <string>

namespace reagent::protocol {

using nlohmann::json;

json to_json(const NextRequest& r) { return {{"tokens", r.tokens}}; }

json to_json(const MaskedRequest& r) {
  return {{"tokens", r.tokens}, {"retain", r.retain}, {"seed", r.seed}};
}

json to_json(const FillRequest& r) {
  return {{"tokens", r.tokens}, {"mask_positions", r.mask_positions}};
}

json to_json(const ProbsResponse& r) { return {{"probs", r.probs}}; }

json to_json(const FillResponse& r) {
  json fills = json::object();
  for (const auto& [pos, tok] : r.fills) fills[std::to_string(pos)] = tok;
  return {{"fills", fills}};
}

json to_json(const InfoResponse& r) {
  json j = {{"vocab_size", r.vocab_size}, {"model_name", r.model_name}, {"pos_tags", r.pos_tags}};
  if (r.pos_table) j["pos_table"] = *r.pos_table;
  return j;
}

json to_json(const ErrorBody& r) { return {{"error", r.error}, {"retryable", r.retryable}}; }

NextRequest parse_next_request(const json& j) {
  return {j.at("tokens").get<std::vector<TokenId>>()};
}

MaskedRequest parse_masked_request(const json& j) {
  MaskedRequest r;
  r.tokens = j.at("tokens").get<std::vector<TokenId>>();
  r.retain = j.at("retain").get<std::vector<double>>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

FillRequest parse_fill_request(const json& j) {
  return {j.at("tokens").get<std::vector<TokenId>>(),
          j.at("mask_positions").get<std::vector<std::size_t>>()};
}

ProbsResponse parse_probs_response(const json& j) {
  return {j.at("probs").get<std::vector<double>>()};
}

FillResponse parse_fill_response(const json& j) {
  FillResponse r;
  for (const auto& [key, value] : j.at("fills").items()) {
    r.fills[std::stoul(key)] = value.get<TokenId>();
  }
  return r;
}

InfoResponse parse_info_response(const json& j) {
  InfoResponse r;
  r.vocab_size = j.at("vocab_size").get<std::size_t>();
  r.model_name = j.at("model_name").get<std::string>();
  r.pos_tags = j.at("pos_tags").get<bool>();
  if (j.contains("pos_table")) r.pos_table = j.at("pos_table").get<std::vector<int>>();
  return r;
}

ErrorBody parse_error_body(const json& j) {
  return {j.at("error").get<std::string>(), j.value("retryable", false)};
}

}  // namespace reagent::protocol
