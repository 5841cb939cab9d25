#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include "twinworld/errors.hpp"
#include "twinworld/generation.hpp"

namespace twinworld {

namespace network_guard {
void record_attempt();
}

using nlohmann::json;

ChatCompletionPort::ChatCompletionPort(std::string endpoint, std::string model, std::string api_key,
                                       int timeout_seconds)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      timeout_seconds_(timeout_seconds) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
  if (endpoint_.empty()) throw ConfigError("chat endpoint is empty");
  if (model_.empty()) throw ConfigError("chat model is empty");
}

std::shared_ptr<ChatCompletionPort> ChatCompletionPort::from_environment() {
  auto env = [](const char* name) {
    const char* v = std::getenv(name);
    return std::string(v ? v : "");
  };
  std::string endpoint = env("TWINWORLD_ENDPOINT");
  std::string model = env("TWINWORLD_MODEL");
  if (endpoint.empty() || model.empty()) {
    throw ConfigError("live generation needs TWINWORLD_ENDPOINT and TWINWORLD_MODEL (or pass --mock)");
  }
  return std::make_shared<ChatCompletionPort>(endpoint, model, env("TWINWORLD_API_KEY"));
}

std::string ChatCompletionPort::complete(const GenerationRequest& request, const std::string& prompt, int) {
  network_guard::record_attempt();
  if (network_guard::denied()) throw TransportError("network access is disabled");

  // endpoint is scheme://host[:port][/base]
  std::size_t scheme_end = endpoint_.find("://");
  std::size_t path_start = endpoint_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  std::string origin = endpoint_.substr(0, path_start);
  std::string base = path_start == std::string::npos ? "" : endpoint_.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_seconds_);
  client.set_read_timeout(timeout_seconds_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  json body{{"model", model_},
            {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
            {"max_tokens", request.max_tokens}};
  auto res = client.Post(base + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) throw TransportError("chat request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("chat endpoint returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw RequestError("chat endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  try {
    json reply = json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed chat response: ") + e.what());
  }
}

}  // namespace twinworld
