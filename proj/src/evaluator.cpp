#include "twinworld/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "twinworld/errors.hpp"
#include "twinworld/text.hpp"

namespace twinworld {

using nlohmann::json;

std::vector<std::string> normalize_answer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u)) continue;
    cleaned.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
  }
  std::vector<std::string> tokens;
  std::istringstream in(cleaned);
  std::string tok;
  while (in >> tok) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    tokens.push_back(tok);
  }
  return tokens;
}

std::string normalized_text(std::string_view text) {
  std::string out;
  for (const auto& t : normalize_answer(text)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

double token_f1(std::string_view prediction, std::string_view gold) {
  auto p = normalize_answer(prediction);
  auto g = normalize_answer(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : g) ++counts[t];
  int common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / static_cast<double>(p.size());
  double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

double recall_at_k(const std::vector<std::string>& retrieved, const std::vector<std::string>& gold, int k) {
  if (k < 1) throw UndefinedInputError("recall@k needs k >= 1");
  std::set<std::string> g(gold.begin(), gold.end());
  if (g.empty()) throw UndefinedInputError("recall@k with empty gold set");
  std::set<std::string> hit;
  for (std::size_t i = 0; i < retrieved.size() && i < static_cast<std::size_t>(k); ++i) {
    if (g.count(retrieved[i])) hit.insert(retrieved[i]);
  }
  return static_cast<double>(hit.size()) / static_cast<double>(g.size());
}

EvalReport EvalReport::make(Variant variant, std::string condition, std::string metric, std::vector<TaskScore> scores) {
  EvalReport r;
  r.variant = variant;
  r.condition = std::move(condition);
  r.metric = std::move(metric);
  r.scores = std::move(scores);
  double sum = 0.0;
  for (const auto& s : r.scores) sum += s.score;
  r.aggregate = r.scores.empty() ? 0.0 : 100.0 * sum / static_cast<double>(r.scores.size());
  return r;
}

bool EvalReport::consistent(double tolerance) const {
  return std::abs(make(variant, condition, metric, scores).aggregate - aggregate) <= tolerance;
}

json EvalReport::to_json() const {
  json s = json::array();
  for (const auto& t : scores) s.push_back({{"pair_id", t.pair_id}, {"score", t.score}});
  return {{"variant", to_string(variant)}, {"condition", condition}, {"metric", metric},
          {"aggregate", aggregate},        {"scores", s}};
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  r.variant = variant_from(j.at("variant").get<std::string>());
  r.condition = j.at("condition").get<std::string>();
  r.metric = j.value("metric", "");
  for (const auto& s : j.at("scores")) r.scores.push_back({s.at("pair_id").get<std::string>(), s.at("score").get<double>()});
  r.aggregate = j.at("aggregate").get<double>();
  return r;
}

double nav_success_rate(const std::vector<Transcript>& transcripts) {
  if (transcripts.empty()) throw UndefinedInputError("success rate over no transcripts");
  std::size_t ok = 0;
  for (const auto& t : transcripts) {
    if (t.status == EpisodeStatus::ongoing) throw UndefinedInputError("transcript " + t.task.pair_id + " is not terminal");
    if (t.status == EpisodeStatus::success) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(transcripts.size());
}

EvalReport nav_report(const std::vector<Transcript>& transcripts, const std::string& condition) {
  if (transcripts.empty()) throw UndefinedInputError("navigation report over no transcripts");
  std::vector<TaskScore> scores;
  for (const auto& t : transcripts) {
    if (t.variant != transcripts.front().variant) throw AlignmentError("transcripts mix variants");
    scores.push_back({t.task.pair_id, t.status == EpisodeStatus::success ? 1.0 : 0.0});
  }
  return EvalReport::make(transcripts.front().variant, condition, "success", std::move(scores));
}

EvalReport qa_report(const std::map<std::string, std::string>& predictions,
                     const std::map<std::string, std::string>& gold_answers, Variant variant,
                     const std::string& condition) {
  std::vector<TaskScore> scores;
  for (const auto& [pair_id, gold] : gold_answers) {
    auto it = predictions.find(pair_id);
    scores.push_back({pair_id, it == predictions.end() ? 0.0 : token_f1(it->second, gold)});
  }
  return EvalReport::make(variant, condition, "f1", std::move(scores));
}

KaResult knowledge_advantage(const EvalReport& real, const EvalReport& synth) {
  if (real.condition != synth.condition) {
    throw AlignmentError("conditions differ: '" + real.condition + "' vs '" + synth.condition + "'");
  }
  if (real.metric != synth.metric) throw AlignmentError("metrics differ: '" + real.metric + "' vs '" + synth.metric + "'");
  if (real.variant != Variant::rm || synth.variant != Variant::sm) {
    throw AlignmentError("expected a real-mapped and a synth-mapped report");
  }
  std::set<std::string> a, b;
  for (const auto& s : real.scores) a.insert(s.pair_id);
  for (const auto& s : synth.scores) b.insert(s.pair_id);
  if (a != b || a.size() != real.scores.size() || b.size() != synth.scores.size()) {
    std::string example;
    for (const auto& id : a) {
      if (!b.count(id)) {
        example = id;
        break;
      }
    }
    if (example.empty()) {
      for (const auto& id : b) {
        if (!a.count(id)) {
          example = id;
          break;
        }
      }
    }
    throw AlignmentError("pair ids differ between variants" + (example.empty() ? "" : " (e.g. " + example + ")"));
  }
  return {real.condition, real.metric, real.aggregate, synth.aggregate, real.aggregate - synth.aggregate};
}

KaSummary summarize_ka(const KaResult& base, const std::optional<KaResult>& ext) {
  KaSummary s{base, ext, std::nullopt};
  if (ext) s.delta = base.ka - ext->ka;
  return s;
}

json KaSummary::to_json() const {
  auto row = [](const KaResult& r) {
    return json{{"condition", r.condition}, {"metric", r.metric}, {"p_r", r.p_r}, {"p_s", r.p_s}, {"ka", r.ka}};
  };
  json j{{"base", row(base)}, {"ka_base", base.ka}};
  if (ext) {
    j["ext"] = row(*ext);
    j["ka_ext"] = ext->ka;
  }
  if (delta) j["delta"] = *delta;
  return j;
}

double external_mention_rate(const std::vector<Transcript>& transcripts, const std::vector<std::string>& labels,
                             const std::map<std::string, std::set<std::string>>& page_labels,
                             const std::map<std::string, std::string>& titles) {
  std::size_t steps = 0;
  std::size_t flagged = 0;
  auto add_page = [&](std::set<std::string>& seen, const std::string& page) {
    auto it = page_labels.find(page);
    if (it != page_labels.end()) seen.insert(it->second.begin(), it->second.end());
  };
  for (const auto& t : transcripts) {
    std::set<std::string> seen;
    add_page(seen, t.task.source);
    auto title = titles.find(t.task.target);
    if (title != titles.end()) seen.insert(title->second);
    for (const auto& s : t.steps) {
      ++steps;
      bool external = false;
      for (const auto& l : labels) {
        if (seen.count(l)) continue;
        if (contains_whole_word(s.agent_text, l)) {
          external = true;
          break;
        }
      }
      if (external) ++flagged;
      add_page(seen, s.page_after);
    }
  }
  return steps == 0 ? 0.0 : static_cast<double>(flagged) / static_cast<double>(steps);
}

std::map<std::string, std::set<std::string>> page_label_sets(const Corpus& corpus, Variant v, const Universe& labels) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& id : corpus.retained_ids()) {
    auto& s = out[id];
    s.insert(corpus.title(id, v));
    for (const auto& r : corpus.page(id, v).refs) {
      s.insert(r.display);
      if (labels.graph.find(r.id)) s.insert(labels.label(r.id));
    }
  }
  return out;
}

namespace {

std::string fixed1(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  return buf;
}

}  // namespace

std::string ka_table_csv(const std::vector<KaResult>& rows) {
  std::string out = "condition,metric,P_R,P_S,KA\n";
  for (const auto& r : rows) {
    out += r.condition + "," + r.metric + "," + fixed1(r.p_r) + "," + fixed1(r.p_s) + "," + fixed1(r.ka) + "\n";
  }
  return out;
}

std::string ka_table_text(const std::vector<KaResult>& rows) {
  std::size_t w = std::string("condition").size();
  for (const auto& r : rows) w = std::max(w, r.condition.size());
  auto pad = [](std::string s, std::size_t n, bool right) {
    if (s.size() >= n) return s;
    return right ? std::string(n - s.size(), ' ') + s : s + std::string(n - s.size(), ' ');
  };
  std::string out = pad("condition", w, false) + "  " + pad("P_R", 6, true) + "  " + pad("P_S", 6, true) + "  " +
                    pad("KA", 6, true) + "\n";
  for (const auto& r : rows) {
    out += pad(r.condition, w, false) + "  " + pad(fixed1(r.p_r), 6, true) + "  " + pad(fixed1(r.p_s), 6, true) +
           "  " + pad(fixed1(r.ka), 6, true) + "\n";
  }
  return out;
}

}  // namespace twinworld
