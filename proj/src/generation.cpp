#include "twinworld/generation.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "twinworld/assets.hpp"
#include "twinworld/errors.hpp"
#include "twinworld/hashing.hpp"
#include "twinworld/text.hpp"

namespace twinworld {

using nlohmann::json;

std::string GenerationRequest::hash() const { return sha256_hex(template_id + "\n" + variables.dump()); }

const TemplateStore& TemplateStore::builtin() {
  static const TemplateStore store = [] {
    std::map<std::string, std::string> t;
    const std::string prefix = "prompts/";
    const std::string suffix = ".txt";
    for (const auto& [path, body] : assets::all()) {
      if (path.rfind(prefix, 0) != 0 || path.size() <= prefix.size() + suffix.size()) continue;
      if (path.compare(path.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
      t[path.substr(prefix.size(), path.size() - prefix.size() - suffix.size())] = body;
    }
    return TemplateStore(std::move(t));
  }();
  return store;
}

TemplateStore::TemplateStore(std::map<std::string, std::string> templates) : templates_(std::move(templates)) {}

std::vector<std::string> TemplateStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, body] : templates_) out.push_back(id);
  return out;
}

std::vector<std::string> TemplateStore::variables(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw RequestError("unknown template '" + id + "'");
  std::set<std::string> seen;
  std::vector<std::string> out;
  const std::string& body = it->second;
  std::size_t pos = 0;
  while ((pos = body.find("{{", pos)) != std::string::npos) {
    std::size_t end = body.find("}}", pos + 2);
    if (end == std::string::npos) break;
    std::string name = body.substr(pos + 2, end - pos - 2);
    if (seen.insert(name).second) out.push_back(name);
    pos = end + 2;
  }
  return out;
}

std::string render_variable(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_array() && std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_string(); })) {
    if (value.empty()) return "(none)";
    std::string out;
    for (const auto& v : value) out += "- " + v.get<std::string>() + "\n";
    out.pop_back();
    return out;
  }
  if (value.is_number() || value.is_boolean()) return value.dump();
  return value.dump(2);
}

std::string TemplateStore::render(const GenerationRequest& request) const {
  auto names = variables(request.template_id);
  if (!request.variables.is_object()) throw RequestError("variables must be an object");
  for (const auto& name : names) {
    if (!request.variables.contains(name)) {
      throw RequestError("template '" + request.template_id + "' needs variable '" + name + "'");
    }
  }
  const std::string& body = templates_.at(request.template_id);
  std::string out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t open = body.find("{{", pos);
    std::size_t close = open == std::string::npos ? std::string::npos : body.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    out.append(body, pos, open - pos);
    out += render_variable(request.variables.at(body.substr(open + 2, close - open - 2)));
    pos = close + 2;
  }
  return out;
}

GenerationClient::GenerationClient(std::shared_ptr<GenerationPort> port, ClientOptions options,
                                   const TemplateStore& templates)
    : port_(std::move(port)), options_(std::move(options)), templates_(templates) {
  if (!port_) throw ConfigError("generation client needs a port");
  if (options_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (options_.in_flight < 1) throw ConfigError("in_flight must be >= 1");
}

std::string GenerationClient::call(const GenerationRequest& request) {
  const std::string prompt = templates_.render(request);
  const std::string hash = request.hash();

  {
    std::unique_lock<std::mutex> lock(slot_mutex_);
    slot_cv_.wait(lock, [&] { return active_ < options_.in_flight; });
    ++active_;
  }
  struct Release {
    GenerationClient* self;
    ~Release() {
      {
        std::lock_guard<std::mutex> lock(self->slot_mutex_);
        --self->active_;
      }
      self->slot_cv_.notify_one();
    }
  } release{this};

  json attempts = json::array();
  for (int attempt = 0;; ++attempt) {
    try {
      std::string response = port_->complete(request, prompt, attempt);
      attempts.push_back(json{{"ok", true}});
      append_log(json{{"template", request.template_id},
                      {"request_hash", hash},
                      {"variables", request.variables},
                      {"port", port_->name()},
                      {"attempts", attempts},
                      {"response", response}});
      return response;
    } catch (const TransportError& e) {
      attempts.push_back(json{{"ok", false}, {"error", e.what()}});
      if (attempt >= options_.max_retries) {
        append_log(json{{"template", request.template_id},
                        {"request_hash", hash},
                        {"variables", request.variables},
                        {"port", port_->name()},
                        {"attempts", attempts},
                        {"response", nullptr}});
        throw TransportError(request.template_id + " failed after " + std::to_string(attempt + 1) +
                             " attempt(s): " + e.what());
      }
    }
  }
}

void GenerationClient::append_log(json record) {
  std::lock_guard<std::mutex> lock(log_mutex_);
  record["seq"] = next_seq_++;
  retries_ += record["attempts"].size() - 1;
  if (!options_.log_path.empty()) {
    std::ofstream out(options_.log_path, std::ios::app | std::ios::binary);
    out << record.dump() << "\n";
  }
  log_.push_back(std::move(record));
}

std::vector<json> GenerationClient::log() const {
  std::lock_guard<std::mutex> lock(log_mutex_);
  return log_;
}

std::size_t GenerationClient::calls() const {
  std::lock_guard<std::mutex> lock(log_mutex_);
  return log_.size();
}

std::size_t GenerationClient::retries() const {
  std::lock_guard<std::mutex> lock(log_mutex_);
  return retries_;
}

ReplayPort::ReplayPort(const std::vector<json>& log) {
  for (const auto& rec : log) {
    if (!rec.contains("response") || rec["response"].is_null()) continue;
    responses_[rec.at("request_hash").get<std::string>()].push_back(rec["response"].get<std::string>());
  }
}

std::shared_ptr<ReplayPort> ReplayPort::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open call log " + path);
  std::vector<json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return std::make_shared<ReplayPort>(records);
}

std::string ReplayPort::complete(const GenerationRequest& request, const std::string&, int) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::string h = request.hash();
  auto it = responses_.find(h);
  if (it == responses_.end()) throw TransportError("no recorded response for " + request.template_id + " " + h);
  std::size_t& cur = cursor_[h];
  // Repeated identical requests cycle through their recordings.
  const std::string& out = it->second[cur % it->second.size()];
  ++cur;
  return out;
}

namespace network_guard {
namespace {
std::atomic<std::uint64_t> g_attempts{0};
std::atomic<bool> g_denied{false};
}  // namespace

std::uint64_t attempts() { return g_attempts.load(); }
void reset() { g_attempts.store(0); }
void deny(bool denied) { g_denied.store(denied); }
bool denied() { return g_denied.load(); }

// Used by the live port.
void record_attempt() { g_attempts.fetch_add(1); }
}  // namespace network_guard

int in_flight_from_environment(int fallback) {
  const char* v = std::getenv("TWINWORLD_IN_FLIGHT");
  if (!v || !*v) return fallback;
  try {
    int n = std::stoi(v);
    if (n < 1) throw ConfigError("TWINWORLD_IN_FLIGHT must be >= 1");
    return n;
  } catch (const std::logic_error&) {
    throw ConfigError(std::string("TWINWORLD_IN_FLIGHT is not an integer: ") + v);
  }
}

}  // namespace twinworld
