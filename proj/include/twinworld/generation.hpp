#pragma once
// Text-generation ports. Every external capability (page drafting, link
// insertion, renaming, judging, question writing) goes through a
// GenerationClient, which renders a named template, records the call and
// retries transport failures.

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace twinworld {

struct GenerationRequest {
  std::string template_id;
  nlohmann::json variables = nlohmann::json::object();
  int max_tokens = 2048;

  // Hash of template id and variables; stable across runs and processes.
  std::string hash() const;
};

// Implementations must tolerate concurrent calls.
class GenerationPort {
 public:
  virtual ~GenerationPort() = default;
  // `attempt` counts retries of the same logical call, starting at 0.
  // Throws TransportError on delivery failure.
  virtual std::string complete(const GenerationRequest& request, const std::string& prompt, int attempt) = 0;
  virtual std::string name() const = 0;
};

// Prompt templates with {{variable}} placeholders, loaded from the embedded
// prompts/ directory.
class TemplateStore {
 public:
  static const TemplateStore& builtin();
  explicit TemplateStore(std::map<std::string, std::string> templates);

  bool contains(const std::string& id) const { return templates_.count(id) > 0; }
  std::vector<std::string> variables(const std::string& id) const;
  // Throws RequestError for an unknown template or an unbound variable.
  std::string render(const GenerationRequest& request) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::string> templates_;
};

// Renders a variable for prompt text: strings verbatim, string lists as
// bullet lines, anything else as indented JSON.
std::string render_variable(const nlohmann::json& value);

struct ClientOptions {
  int max_retries = 2;
  int in_flight = 4;
  std::string log_path;  // empty: keep the log in memory only
};

class GenerationClient {
 public:
  GenerationClient(std::shared_ptr<GenerationPort> port, ClientOptions options = {},
                   const TemplateStore& templates = TemplateStore::builtin());

  // Validates and renders the request, then calls the port. Throws
  // RequestError on template problems and TransportError once retries are
  // exhausted.
  std::string call(const GenerationRequest& request);

  // Snapshot of the call log, one record per logical call.
  std::vector<nlohmann::json> log() const;
  std::size_t calls() const;
  std::size_t retries() const;
  const ClientOptions& options() const { return options_; }
  GenerationPort& port() { return *port_; }

 private:
  void append_log(nlohmann::json record);

  std::shared_ptr<GenerationPort> port_;
  ClientOptions options_;
  const TemplateStore& templates_;

  mutable std::mutex log_mutex_;
  std::vector<nlohmann::json> log_;
  std::size_t retries_ = 0;
  std::uint64_t next_seq_ = 0;

  std::mutex slot_mutex_;
  std::condition_variable slot_cv_;
  int active_ = 0;
};

// Runs fn(i) for i in [0, n) on at most `in_flight` threads. Results come back
// in index order regardless of scheduling. The first exception is rethrown
// after all workers stop.
template <typename T>
std::vector<T> parallel_map(std::size_t n, int in_flight, const std::function<T(std::size_t)>& fn);

// Replays a recorded call log. Responses are matched by request hash and
// consumed in recorded order; an unknown request is a TransportError.
class ReplayPort : public GenerationPort {
 public:
  explicit ReplayPort(const std::vector<nlohmann::json>& log);
  static std::shared_ptr<ReplayPort> from_file(const std::string& path);
  std::string complete(const GenerationRequest& request, const std::string& prompt, int attempt) override;
  std::string name() const override { return "replay"; }

 private:
  std::mutex mutex_;
  std::map<std::string, std::vector<std::string>> responses_;
  std::map<std::string, std::size_t> cursor_;
};

// Chat-completion client over HTTPS. Configured from TWINWORLD_ENDPOINT,
// TWINWORLD_MODEL and TWINWORLD_API_KEY.
class ChatCompletionPort : public GenerationPort {
 public:
  ChatCompletionPort(std::string endpoint, std::string model, std::string api_key, int timeout_seconds = 120);
  static std::shared_ptr<ChatCompletionPort> from_environment();
  std::string complete(const GenerationRequest& request, const std::string& prompt, int attempt) override;
  std::string name() const override { return "chat:" + model_; }

 private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_;
  int timeout_seconds_;
};

// Process-wide network guard. Every live request increments the counter;
// with the guard closed, live requests fail before opening a socket.
namespace network_guard {
std::uint64_t attempts();
void reset();
void deny(bool denied);
bool denied();
}  // namespace network_guard

// In-flight limit from TWINWORLD_IN_FLIGHT, or `fallback`.
int in_flight_from_environment(int fallback);

// ---------------------------------------------------------------------------

template <typename T>
std::vector<T> parallel_map(std::size_t n, int in_flight, const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(n);
  std::exception_ptr first_error;
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n || first_error) return;
        i = next++;
      }
      try {
        T value = fn(i);
        std::lock_guard<std::mutex> lock(mu);
        slots[i].emplace(std::move(value));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, in_flight)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace twinworld
