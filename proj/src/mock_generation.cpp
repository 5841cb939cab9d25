#include "twinworld/mock_generation.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <tuple>

#include "twinworld/errors.hpp"
#include "twinworld/hashing.hpp"
#include "twinworld/text.hpp"

namespace twinworld {

using nlohmann::json;

MockProfile MockProfile::from_json(const json& j) {
  MockProfile p;
  p.linker = j.value("linker", p.linker);
  p.restorer = j.value("restorer", p.restorer);
  p.guesser = j.value("guesser", p.guesser);
  p.composer = j.value("composer", p.composer);
  p.navigator = j.value("navigator", p.navigator);
  if (j.contains("scripted")) {
    for (const auto& [tmpl, list] : j.at("scripted").items()) {
      for (const auto& r : list) p.scripted[tmpl].push_back(r.get<std::string>());
    }
  }
  if (j.contains("failures")) {
    for (const auto& f : j.at("failures")) {
      p.failures.push_back({f.at("call").get<std::size_t>(), f.value("times", 1), f.value("template", "")});
    }
  }
  return p;
}

json MockProfile::to_json() const {
  json failures_j = json::array();
  for (const auto& f : failures) failures_j.push_back({{"call", f.call}, {"times", f.times}, {"template", f.template_id}});
  json scripted_j = json::object();
  for (const auto& [t, q] : scripted) scripted_j[t] = std::vector<std::string>(q.begin(), q.end());
  return json{{"linker", linker},       {"restorer", restorer},   {"guesser", guesser},
              {"composer", composer},   {"navigator", navigator}, {"scripted", scripted_j},
              {"failures", failures_j}};
}

MockGenerationPort::MockGenerationPort(MockProfile profile) : profile_(std::move(profile)) {}

std::string MockGenerationPort::complete(const GenerationRequest& request, const std::string&, int attempt) {
  std::size_t global_call = 0;
  std::size_t template_call = 0;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto tid = std::this_thread::get_id();
    if (attempt == 0) current_[tid] = {++logical_calls_, ++per_template_calls_[request.template_id]};
    std::tie(global_call, template_call) = current_[tid];
    for (const auto& f : profile_.failures) {
      bool hit = f.template_id.empty() ? f.call == global_call
                                       : (f.template_id == request.template_id && f.call == template_call);
      if (hit && attempt < f.times) {
        throw TransportError("injected failure on call " + std::to_string(f.call) + " attempt " +
                             std::to_string(attempt + 1));
      }
    }
    auto it = profile_.scripted.find(request.template_id);
    if (it != profile_.scripted.end() && !it->second.empty()) {
      std::string out = std::move(it->second.front());
      it->second.pop_front();
      return out;
    }
  }
  return respond(request);
}

std::string render_mock_page(const json& facts) {
  if (!facts.is_array() || facts.empty()) throw InputError("mock page renderer needs at least one fact");
  std::string out;
  for (const auto& f : facts) {
    out += f.at("subject").get<std::string>() + " " + f.at("relation").get<std::string>() + " " +
           f.at("object").get<std::string>();
    for (const auto& q : f.value("qualifiers", json::array())) {
      if (q.value("kind", "") == "timestamp") {
        out += " in " + q.at("value").get<std::string>();
        break;
      }
    }
    out += ".\n";
  }
  return out;
}

std::string mock_insert_links(const std::string& draft, const json& entity_map) {
  std::vector<std::pair<std::string, std::string>> entries;  // (label, id)
  for (const auto& e : entity_map) entries.emplace_back(e.at("label").get<std::string>(), e.at("id").get<std::string>());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  struct Span {
    std::size_t begin, end;
    std::string id;
  };
  std::vector<Span> spans;
  for (const auto& [label, id] : entries) {
    if (label.empty()) continue;
    std::size_t pos = find_whole_word(draft, label);
    while (pos != std::string::npos) {
      std::size_t end = pos + label.size();
      bool overlaps = std::any_of(spans.begin(), spans.end(), [&](const Span& s) { return pos < s.end && s.begin < end; });
      if (!overlaps) {
        spans.push_back({pos, end, id});
        break;
      }
      pos = find_whole_word(draft, label, pos + 1);
    }
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
  std::string out;
  std::size_t cur = 0;
  for (const auto& s : spans) {
    out.append(draft, cur, s.begin - cur);
    out += make_link(draft.substr(s.begin, s.end - s.begin), s.id);
    cur = s.end;
  }
  out.append(draft, cur, std::string::npos);
  return out;
}

std::string mock_invent_name(std::uint64_t seed, const std::string& entity_type,
                             const std::vector<std::string>& parent_names) {
  static const char* onsets[] = {"b", "br", "c", "d", "dr", "f", "g", "h", "j", "k", "l", "m",
                                 "n", "p", "qu", "r", "s", "st", "t", "th", "v", "w", "z"};
  static const char* vowels[] = {"a", "e", "i", "o", "u", "ae", "ia", "ou"};
  static const char* codas[] = {"", "n", "r", "s", "th", "l", "x", "nd", "rk"};
  Rng rng(seed);
  auto word = [&] {
    std::string w;
    std::size_t syllables = 2 + rng.index(2);
    for (std::size_t i = 0; i < syllables; ++i) {
      w += onsets[rng.index(std::size(onsets))];
      w += vowels[rng.index(std::size(vowels))];
    }
    w += codas[rng.index(std::size(codas))];
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  };
  std::string name;
  if (!parent_names.empty()) {
    name = word();
    for (const auto& p : parent_names) name += " " + p;
    return name;
  }
  bool person = entity_type.find("human") != std::string::npos || entity_type.find("person") != std::string::npos;
  std::size_t words = person ? 2 : 1 + rng.index(2);
  for (std::size_t i = 0; i < words; ++i) name += (i ? " " : "") + word();
  return name;
}

namespace {

std::string strip_period(std::string s) {
  s = trim(s);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

// Splits "X in Y" at the last " in " when Y is a single token.
std::pair<std::string, std::string> split_time_clause(const std::string& s) {
  std::size_t pos = s.rfind(" in ");
  if (pos == std::string::npos) return {s, ""};
  std::string tail = s.substr(pos + 4);
  if (tail.empty() || tail.find(' ') != std::string::npos) return {s, ""};
  return {s.substr(0, pos), tail};
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string mock_extract(const json& vars) {
  auto lines = split_lines(strip_links(vars.at("page").get<std::string>()));
  std::string out;
  for (const auto& t : vars.at("templates")) {
    const std::string known = t.at("known").get<std::string>();
    const std::string relation = t.at("relation").get<std::string>();
    const bool outgoing = t.value("direction", "out") == "out";
    const bool qualified = !t.value("qualifier", "").empty();
    std::vector<std::string> answers;
    for (const auto& raw : lines) {
      std::string line = strip_period(raw);
      if (line.empty()) continue;
      std::string when;
      std::string body = line;
      if (qualified) std::tie(body, when) = split_time_clause(line);
      std::string ans;
      if (outgoing) {
        std::string prefix = known + " " + relation + " ";
        if (!starts_with(body, prefix)) continue;
        ans = body.substr(prefix.size());
      } else {
        std::string suffix = " " + relation + " " + known;
        if (!ends_with(body, suffix)) continue;
        ans = body.substr(0, body.size() - suffix.size());
      }
      if (ans.empty()) continue;
      answers.push_back(qualified ? ans + " ;; " + (when.empty() ? "none" : when) : ans);
    }
    out += std::to_string(t.at("n").get<int>()) + ": ";
    if (answers.empty()) {
      out += "none";
    } else {
      for (std::size_t i = 0; i < answers.size(); ++i) out += (i ? " || " : "") + answers[i];
    }
    out += "\n";
  }
  return out;
}

std::string mock_compose(const json& vars) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> incoming;  // target -> (source, relation)
  std::set<std::string> targets;
  for (const auto& e : vars.at("structure")) {
    incoming[e.at("target").get<std::string>()].emplace_back(e.at("source").get<std::string>(),
                                                             e.at("relation").get<std::string>());
  }
  std::function<std::string(const std::string&, int)> describe = [&](const std::string& node, int depth) {
    auto it = incoming.find(node);
    if (it == incoming.end() || depth > 8) return node;
    std::string d;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      d += (i ? " that is also the " : "the ") + it->second[i].second + " of " + describe(it->second[i].first, depth + 1);
    }
    return d;
  };
  const std::string answer = vars.at("answer").get<std::string>();
  return "Question: What is " + describe(vars.at("answer_node").get<std::string>(), 0) + "?\nAnswer: " + answer + "\n";
}

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  for (const auto& v : j.at(key)) {
    if (v.is_string()) {
      out.push_back(v.get<std::string>());
    } else if (v.is_object() && v.contains("new_label")) {
      out.push_back(v.at("new_label").get<std::string>());
    }
  }
  return out;
}

}  // namespace

std::string MockGenerationPort::respond(const GenerationRequest& request) const {
  const json& v = request.variables;
  const std::string& t = request.template_id;
  if (t == "page_generation") return render_mock_page(v.at("facts"));
  if (t == "insert_references") {
    if (profile_.linker == "none") return v.at("draft").get<std::string>();
    return mock_insert_links(v.at("draft").get<std::string>(), v.at("entity_map"));
  }
  if (t == "restore_real_names") {
    std::string page = v.at("page").get<std::string>();
    if (profile_.restorer == "keep_synthetic") return page;
    std::map<std::string, std::string> mapping;
    for (const char* key : {"name_mapping", "date_mapping"}) {
      for (const auto& m : v.at(key)) mapping[m.at("from").get<std::string>()] = m.at("to").get<std::string>();
    }
    return replace_whole_words(page, mapping);
  }
  if (t == "entity_guess") return "Answer: unknown";
  if (t == "name_generation") {
    int n = v.value("n_candidates", 1);
    std::string out;
    for (int i = 0; i < n; ++i) {
      std::uint64_t seed = mix_seed(0x6e616d65, v.dump(), static_cast<std::uint64_t>(i));
      out += mock_invent_name(seed, v.value("entity_type_label", ""), string_list(v, "parents")) + "\n";
    }
    return out;
  }
  if (t == "fact_extraction") return mock_extract(v);
  if (t == "single_hop_question") {
    std::string q = "What is the " + v.at("relation").get<std::string>() + " of " + v.at("subject").get<std::string>();
    std::string via = v.value("via", "");
    if (!via.empty()) q += " " + via;
    return q + "?";
  }
  if (t == "compose_question") {
    if (profile_.composer == "no_composition") return "No composition";
    return mock_compose(v);
  }
  if (t == "navigation_step") {
    const auto& links = v.at("links");
    if (!links.is_array() || links.empty()) {
      const auto& history = v.at("history");
      return "No links here, going back.\nbacktrack_to_page_in_history(" + history.at(0).get<std::string>() + ")";
    }
    std::string id = links.at(0).at("id").get<std::string>();
    return "Following the first link.\nclick_link_to_page(" + id + ")";
  }
  throw RequestError("mock has no behavior for template '" + t + "'");
}

}  // namespace twinworld
