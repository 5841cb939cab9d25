#pragma once
// Scoring for QA predictions and navigation transcripts, and the
// knowledge-advantage comparison between real- and synth-mapped variants.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "twinworld/corpus_builder.hpp"
#include "twinworld/nav_env.hpp"

namespace twinworld {

// Lowercase, drop ASCII punctuation, drop the articles a/an/the, split on
// whitespace.
std::vector<std::string> normalize_answer(std::string_view text);
// normalize_answer joined by single spaces.
std::string normalized_text(std::string_view text);

// Multiset-overlap F1 of normalized tokens. Both empty gives 1, one empty 0.
double token_f1(std::string_view prediction, std::string_view gold);

// Share of gold pages among the first k retrieved. Throws UndefinedInputError
// for empty gold or k < 1.
double recall_at_k(const std::vector<std::string>& retrieved, const std::vector<std::string>& gold, int k = 5);

struct TaskScore {
  std::string pair_id;
  double score = 0.0;  // in [0, 1]
};

struct EvalReport {
  Variant variant = Variant::sm;
  std::string condition;  // closed_book, one_step_rag, reading_comp, links_only, ...
  std::string metric;     // f1, recall@5, success
  std::vector<TaskScore> scores;
  double aggregate = 0.0;  // mean score x 100

  // Computes the aggregate from the scores.
  static EvalReport make(Variant variant, std::string condition, std::string metric, std::vector<TaskScore> scores);
  bool consistent(double tolerance = 1e-9) const;
  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

// Fraction of transcripts that ended in success. Throws UndefinedInputError
// on an empty set or a non-terminal transcript.
double nav_success_rate(const std::vector<Transcript>& transcripts);

EvalReport nav_report(const std::vector<Transcript>& transcripts, const std::string& condition);

// One prediction per pair id; missing predictions score 0.
EvalReport qa_report(const std::map<std::string, std::string>& predictions,
                     const std::map<std::string, std::string>& gold_answers, Variant variant,
                     const std::string& condition);

struct KaResult {
  std::string condition;
  std::string metric;
  double p_r = 0.0;
  double p_s = 0.0;
  double ka = 0.0;  // p_r - p_s
};

// Throws AlignmentError when the reports differ in condition, metric, variant
// roles or pair ids.
KaResult knowledge_advantage(const EvalReport& real, const EvalReport& synth);

struct KaSummary {
  KaResult base;
  std::optional<KaResult> ext;
  std::optional<double> delta;  // base.ka - ext.ka

  nlohmann::json to_json() const;
};

KaSummary summarize_ka(const KaResult& base, const std::optional<KaResult>& ext = std::nullopt);

// Share of steps whose reasoning names a corpus label (whole word) that has
// not appeared on the target title or on any page visited so far in that
// episode. `page_labels` lists the labels shown on each page; `titles` gives
// the target titles.
double external_mention_rate(const std::vector<Transcript>& transcripts, const std::vector<std::string>& labels,
                             const std::map<std::string, std::set<std::string>>& page_labels,
                             const std::map<std::string, std::string>& titles);

// Labels shown on each retained page of a variant: its title and the labels of
// every referenced entity.
std::map<std::string, std::set<std::string>> page_label_sets(const Corpus& corpus, Variant v,
                                                             const Universe& labels);

// Rows of condition, P_R, P_S, KA with one decimal.
std::string ka_table_csv(const std::vector<KaResult>& rows);
std::string ka_table_text(const std::vector<KaResult>& rows);

}  // namespace twinworld
