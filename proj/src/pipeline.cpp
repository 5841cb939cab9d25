#include "twinworld/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "twinworld/agents.hpp"
#include "twinworld/assets.hpp"
#include "twinworld/errors.hpp"
#include "twinworld/evaluator.hpp"
#include "twinworld/hashing.hpp"
#include "twinworld/mock_generation.hpp"
#include "twinworld/nav_builder.hpp"
#include "twinworld/perturber.hpp"
#include "twinworld/qa_builder.hpp"
#include "twinworld/universe_sampler.hpp"

namespace twinworld {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string rel(const fs::path& root, const fs::path& p) { return fs::relative(p, root).generic_string(); }

std::string stage_of_directory(const std::string& dir) {
  static const std::map<std::string, std::string> stages{{"universe", "sample-universe"}, {"perturb", "perturb"},
                                                         {"corpus", "build-corpus"},      {"qa", "build-qa"},
                                                         {"nav", "build-nav"},            {"eval", "evaluate"}};
  auto it = stages.find(dir);
  if (it != stages.end()) return it->second;
  if (starts_with(dir, "runs/")) return "run-nav";
  return dir;
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

fs::path resolve(const StageContext& ctx, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : ctx.config_dir / path;
}

std::uint64_t derived_seed(const StageContext& ctx, const std::string& stage) {
  return mix_seed(ctx.config.at("seed").get<std::uint64_t>(), stage, 0);
}

int in_flight(const StageContext& ctx) { return std::max(1, ctx.config.value("in_flight", 4)); }

// Collects outputs and writes the manifest for a finished stage.
class StageRun {
 public:
  StageRun(const StageContext& ctx, std::string stage, std::string directory)
      : ctx_(ctx), start_(std::chrono::steady_clock::now()) {
    m_.stage = std::move(stage);
    m_.directory = std::move(directory);
    m_.config = ctx.config;
    m_.version = TWINWORLD_VERSION;
    m_.seeds["seed"] = ctx.config.at("seed");
    fs::remove_all(dir());
    fs::create_directories(dir());
  }

  fs::path dir() const { return ctx_.root / m_.directory; }

  void depends_on(const std::string& directory) {
    RunManifest up = verify_stage(ctx_.root, directory);
    m_.inputs[directory] = up.fingerprint();
  }
  void input_file(const std::string& key, const fs::path& path) { m_.inputs[key] = sha256_file(path.string()); }
  void seed(const std::string& name, std::uint64_t value) { m_.seeds[name] = value; }

  RunManifest finish() {
    for (const auto& entry : fs::recursive_directory_iterator(dir())) {
      if (!entry.is_regular_file() || entry.path().filename() == kManifestName) continue;
      m_.outputs[rel(ctx_.root, entry.path())] = sha256_file(entry.path().string());
    }
    m_.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_text(dir() / kManifestName, m_.to_json().dump(2) + "\n");
    return m_;
  }

 private:
  const StageContext& ctx_;
  RunManifest m_;
  std::chrono::steady_clock::time_point start_;
};

std::unique_ptr<GenerationClient> make_client(const StageContext& ctx, const std::string& directory) {
  std::shared_ptr<GenerationPort> port;
  const json& gen = ctx.config.at("generation");
  if (ctx.mock) {
    network_guard::deny(true);
    port = std::make_shared<MockGenerationPort>(MockProfile::from_json(ctx.config.value("mock_profile", json::object())));
  } else if (!gen.value("replay_dir", "").empty()) {
    port = ReplayPort::from_file((resolve(ctx, gen.at("replay_dir").get<std::string>()) / directory / "calls.jsonl").string());
  } else {
    port = ChatCompletionPort::from_environment();
  }
  ClientOptions opts;
  opts.max_retries = gen.value("max_retries", 2);
  opts.in_flight = in_flight(ctx);
  return std::make_unique<GenerationClient>(port, opts);
}

// Call log ordered by request hash; records of identical requests keep their
// call order.
void save_call_log(const GenerationClient& client, const fs::path& path) {
  auto log = client.log();
  std::stable_sort(log.begin(), log.end(), [](const json& a, const json& b) {
    auto ka = std::make_pair(a.at("request_hash").get<std::string>(), a.at("seq").get<std::uint64_t>());
    auto kb = std::make_pair(b.at("request_hash").get<std::string>(), b.at("seq").get<std::uint64_t>());
    return ka < kb;
  });
  std::string out;
  for (auto& rec : log) {
    rec.erase("seq");
    out += rec.dump() + "\n";
  }
  write_text(path, out);
}

Universe load_real(const StageContext& ctx) { return load_universe((ctx.root / "universe").string()); }
Universe load_synth(const StageContext& ctx) { return load_universe((ctx.root / "perturb" / "synth").string()); }
RenamePlan load_rename_plan(const StageContext& ctx) { return load_plan((ctx.root / "perturb").string()); }
Corpus load_run_corpus(const StageContext& ctx) { return load_corpus((ctx.root / "corpus").string()); }

void require_identical_hyperlinks(const Corpus& corpus) {
  if (corpus.hyperlinks(Variant::rm) != corpus.hyperlinks(Variant::sm)) {
    throw GateFailure("hyperlink mismatch", "real- and synth-mapped corpora link differently");
  }
}

}  // namespace

std::string RunManifest::fingerprint() const {
  json o = outputs;
  return sha256_hex(o.dump());
}

json RunManifest::to_json() const {
  return json{{"stage", stage},     {"directory", directory}, {"inputs", inputs},
              {"config", config},   {"seeds", seeds},         {"outputs", outputs},
              {"version", version}, {"wall_time_s", wall_time_s}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  m.stage = j.at("stage").get<std::string>();
  m.directory = j.at("directory").get<std::string>();
  m.inputs = j.value("inputs", std::map<std::string, std::string>{});
  m.config = j.value("config", json::object());
  m.seeds = j.value("seeds", json::object());
  m.outputs = j.value("outputs", std::map<std::string, std::string>{});
  m.version = j.value("version", "");
  m.wall_time_s = j.value("wall_time_s", 0.0);
  return m;
}

RunManifest load_manifest(const fs::path& stage_dir) { return RunManifest::from_json(read_json(stage_dir / kManifestName)); }

RunManifest verify_stage(const fs::path& root, const std::string& directory) {
  const std::string stage = stage_of_directory(directory);
  fs::path dir = root / directory;
  if (!fs::exists(dir / kManifestName)) throw DependencyError(stage, "no outputs in " + dir.string());
  RunManifest m = load_manifest(dir);
  for (const auto& [path, sha] : m.outputs) {
    fs::path p = root / path;
    if (!fs::exists(p)) throw DependencyError(m.stage, "output " + path + " is missing");
    if (sha256_file(p.string()) != sha) throw DependencyError(m.stage, "output " + path + " was modified");
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().filename() == kManifestName) continue;
    if (!m.outputs.count(rel(root, entry.path()))) {
      throw DependencyError(m.stage, "unexpected file " + rel(root, entry.path()));
    }
  }
  for (const auto& [input, fp] : m.inputs) {
    if (starts_with(input, "file:")) continue;
    RunManifest up = verify_stage(root, input);
    if (up.fingerprint() != fp) {
      throw DependencyError(m.stage, "upstream '" + input + "' changed since " + m.stage + " ran");
    }
  }
  return m;
}

std::vector<std::string> orphan_files(const fs::path& root) {
  std::set<std::string> owned;
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == kManifestName) {
      for (const auto& [path, sha] : load_manifest(entry.path().parent_path()).outputs) owned.insert(path);
      continue;
    }
    files.push_back(rel(root, entry.path()));
  }
  std::vector<std::string> orphans;
  for (const auto& f : files) {
    if (!owned.count(f)) orphans.push_back(f);
  }
  std::sort(orphans.begin(), orphans.end());
  return orphans;
}

json default_config() { return json::parse(assets::get("config/default_config.json")); }

json merge_config(const json& overrides) {
  json base = default_config();
  if (overrides.is_null()) return base;
  if (!overrides.is_object()) throw ConfigError("config must be a JSON object");
  base.merge_patch(overrides);
  return base;
}

StageContext make_context(const std::string& config_path, const std::string& out, bool mock,
                          std::optional<std::uint64_t> seed, std::optional<int> in_flight_override) {
  StageContext ctx;
  if (out.empty()) throw ConfigError("--out is required");
  ctx.root = out;
  ctx.mock = mock;
  json overrides = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config " + config_path);
    try {
      overrides = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(config_path + ": " + e.what());
    }
    ctx.config_dir = fs::absolute(config_path).parent_path();
  } else {
    ctx.config_dir = fs::current_path();
  }
  ctx.config = merge_config(overrides);
  if (seed) ctx.config["seed"] = *seed;
  if (in_flight_override) ctx.config["in_flight"] = *in_flight_override;
  if (!ctx.config.at("seed").is_number_unsigned() && !ctx.config.at("seed").is_number_integer()) {
    throw ConfigError("seed must be an integer");
  }
  if (ctx.config.value("in_flight", 1) < 1) throw ConfigError("in_flight must be >= 1");
  fs::create_directories(ctx.root);
  return ctx;
}

RunManifest run_sample_universe(const StageContext& ctx) {
  StageRun run(ctx, "sample-universe", "universe");
  const json& kg = ctx.config.at("kg");
  KgPaths paths{resolve(ctx, kg.value("entities", "")).string(), resolve(ctx, kg.value("facts", "")).string(),
                resolve(ctx, kg.value("relations", "")).string()};
  if (paths.entities.empty() || paths.facts.empty()) throw ConfigError("kg.entities and kg.facts must be set");
  run.input_file("file:entities", paths.entities);
  run.input_file("file:facts", paths.facts);
  if (!paths.relations.empty()) run.input_file("file:relations", paths.relations);

  KnowledgeGraph graph = load_kg(paths);
  if (ctx.config.at("filter").value("enabled", true)) graph = filter_entities(graph);
  SamplerConfig sc = ctx.config.at("sampler").get<SamplerConfig>();
  sc.rng_seed = derived_seed(ctx, "sample-universe");
  sc.validate();
  if (sc.seeds.empty()) throw ConfigError("sampler.seeds is empty");
  run.seed("sampler", sc.rng_seed);
  Universe u = sample_universe(graph, sc);
  save_universe(u, run.dir().string());
  return run.finish();
}

RunManifest run_perturb(const StageContext& ctx) {
  StageRun run(ctx, "perturb", "perturb");
  run.depends_on("universe");
  Universe u = load_real(ctx);
  const json& rc = ctx.config.at("rename");
  RenameOptions opts;
  opts.retry_cap = rc.value("retry_cap", opts.retry_cap);
  opts.n_candidates = rc.value("n_candidates", opts.n_candidates);
  opts.delta_years = rc.value("delta_years", opts.delta_years);
  auto client = make_client(ctx, "perturb");
  DependencyGraph dep = build_dependency_graph(u);
  RenamePlan plan = plan_renames(dep, u, *client, opts);
  Universe synth = make_synth_universe(u, plan);
  save_plan(plan, run.dir().string());
  save_universe(synth, (run.dir() / "synth").string());
  json dj{{"levels", dep.levels()}, {"edges", json::array()}};
  for (const auto& e : dep.edges) dj["edges"].push_back({{"child", e.child}, {"relation", e.relation}, {"parent", e.parent}});
  write_text(run.dir() / "dependency_graph.json", dj.dump(2) + "\n");
  save_call_log(*client, run.dir() / "calls.jsonl");
  return run.finish();
}

RunManifest run_build_corpus(const StageContext& ctx) {
  StageRun run(ctx, "build-corpus", "corpus");
  run.depends_on("universe");
  run.depends_on("perturb");
  Universe real = load_real(ctx);
  Universe synth = load_synth(ctx);
  RenamePlan plan = load_rename_plan(ctx);
  const json& cc = ctx.config.at("corpus");
  CorpusOptions opts;
  opts.gates.draft = cc.value("draft_threshold", opts.gates.draft);
  opts.gates.pair = cc.value("pair_threshold", opts.gates.pair);
  opts.page_attempts = cc.value("page_attempts", opts.page_attempts);
  opts.in_flight = in_flight(ctx);
  auto client = make_client(ctx, "corpus");
  Corpus corpus = build_corpus(real, synth, plan, *client, *client, opts);
  require_identical_hyperlinks(corpus);
  save_corpus(corpus, run.dir().string());
  save_call_log(*client, run.dir() / "calls.jsonl");
  return run.finish();
}

RunManifest run_build_qa(const StageContext& ctx) {
  StageRun run(ctx, "build-qa", "qa");
  run.depends_on("universe");
  run.depends_on("perturb");
  run.depends_on("corpus");
  Universe real = load_real(ctx);
  Universe synth = load_synth(ctx);
  RenamePlan plan = load_rename_plan(ctx);
  Corpus corpus = load_run_corpus(ctx);
  const json& qc = ctx.config.at("qa");
  QaOptions opts;
  opts.per_motif = qc.value("per_motif", opts.per_motif);
  opts.reuse_cap = qc.value("reuse_cap", opts.reuse_cap);
  opts.retry_cap = qc.value("retry_cap", opts.retry_cap);
  opts.rng_seed = derived_seed(ctx, "build-qa");
  opts.in_flight = in_flight(ctx);
  std::string motifs = qc.value("motifs", "");
  if (!motifs.empty()) {
    fs::path mp = resolve(ctx, motifs);
    run.input_file("file:motifs", mp);
    opts.motifs = motifs_from_json(read_json(mp));
  }
  run.seed("qa", opts.rng_seed);
  auto client = make_client(ctx, "qa");
  QaDataset qa = build_qa(corpus, real, synth, plan, *client, *client, opts);
  save_qa(qa, run.dir().string());
  save_call_log(*client, run.dir() / "calls.jsonl");
  return run.finish();
}

RunManifest run_build_nav(const StageContext& ctx) {
  StageRun run(ctx, "build-nav", "nav");
  run.depends_on("corpus");
  Corpus corpus = load_run_corpus(ctx);
  require_identical_hyperlinks(corpus);
  DocGraph graph = build_doc_graph(corpus, Variant::sm);
  const json& nc = ctx.config.at("nav");
  std::uint64_t seed = derived_seed(ctx, "build-nav");
  run.seed("nav", seed);
  NavSampleResult r = sample_nav_pairs(graph, nc.value("per_bucket", 10), seed, nc.value("max_path", kStepCap));
  std::string tasks;
  for (const auto& t : r.tasks) tasks += json(t).dump() + "\n";
  write_text(run.dir() / "tasks.jsonl", tasks);
  write_text(run.dir() / "shortfall.json", r.shortfall.dump(2) + "\n");
  std::string edges;
  for (const auto& [a, b] : graph.edges()) edges += json::array({a, b}).dump() + "\n";
  write_text(run.dir() / "doc_graph.jsonl", edges);
  return run.finish();
}

std::vector<NavTask> load_nav_tasks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<NavTask> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line).get<NavTask>());
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

RunManifest run_run_nav(const StageContext& ctx) {
  const json& rc = ctx.config.at("run_nav");
  Variant v = ctx.variant ? *ctx.variant : variant_from(rc.value("variant", "sm"));
  ObservationMode mode = ctx.mode ? *ctx.mode : observation_mode_from(rc.value("mode", "links_only"));
  const std::string agent = rc.value("agent", "model");
  if (agent != "model" && agent != "oracle" && agent != "random") {
    throw ConfigError("run_nav.agent must be model, oracle or random");
  }
  const std::string dir = "runs/" + std::string(to_string(v)) + "-" + std::string(to_string(mode));
  StageRun run(ctx, "run-nav", dir);
  run.depends_on("corpus");
  run.depends_on("nav");
  Corpus corpus = load_run_corpus(ctx);
  auto tasks = load_nav_tasks((ctx.root / "nav" / "tasks.jsonl").string());
  NavWorld world(corpus, v);
  DocGraph graph = build_doc_graph(corpus, v);
  std::uint64_t seed = derived_seed(ctx, "run-nav");
  run.seed("agent", seed);
  std::unique_ptr<GenerationClient> client;
  if (agent == "model") client = make_client(ctx, dir);
  AgentFactory factory = [&]() -> std::unique_ptr<Agent> {
    if (agent == "oracle") return std::make_unique<OracleAgent>(graph);
    if (agent == "random") return std::make_unique<RandomAgent>(seed);
    return std::make_unique<ModelAgent>(*client);
  };
  auto transcripts = run_agent(tasks, factory, world, mode, in_flight(ctx));
  save_transcripts(transcripts, (run.dir() / "transcripts.jsonl").string());
  json summary{{"variant", to_string(v)}, {"mode", to_string(mode)}, {"agent", agent}, {"episodes", transcripts.size()}};
  if (!transcripts.empty()) summary["success_rate"] = nav_success_rate(transcripts);
  write_text(run.dir() / "summary.json", summary.dump(2) + "\n");
  if (client) save_call_log(*client, run.dir() / "calls.jsonl");
  return run.finish();
}

namespace {

std::map<std::string, std::string> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open predictions " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      out[j.at("pair_id").get<std::string>()] = j.at("prediction").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(lineno, path.string() + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> all_labels(const Universe& u) {
  std::set<std::string> s;
  for (const auto& [id, l] : u.labeling) {
    if (!l.empty()) s.insert(l);
  }
  return {s.begin(), s.end()};
}

}  // namespace

RunManifest run_evaluate(const StageContext& ctx) {
  StageRun run(ctx, "evaluate", "eval");
  std::vector<std::string> run_dirs;
  if (fs::exists(ctx.root / "runs")) {
    for (const auto& entry : fs::directory_iterator(ctx.root / "runs")) {
      if (fs::exists(entry.path() / kManifestName)) run_dirs.push_back(rel(ctx.root, entry.path()));
    }
  }
  std::sort(run_dirs.begin(), run_dirs.end());
  const json preds = ctx.config.at("evaluate").value("qa_predictions", json::array());
  if (run_dirs.empty() && preds.empty()) throw InputError("nothing to evaluate: no navigation runs and no QA predictions");

  std::vector<KaResult> rows;
  json mentions = json::object();
  std::map<std::string, KaResult> nav_ka;

  if (!run_dirs.empty()) {
    run.depends_on("corpus");
    run.depends_on("universe");
    run.depends_on("perturb");
    for (const auto& d : run_dirs) run.depends_on(d);
    Corpus corpus = load_run_corpus(ctx);
    Universe real = load_real(ctx);
    Universe synth = load_synth(ctx);
    std::map<std::string, std::map<Variant, EvalReport>> by_mode;
    for (const auto& d : run_dirs) {
      auto transcripts = load_transcripts((ctx.root / d / "transcripts.jsonl").string());
      if (transcripts.empty()) continue;
      Variant v = transcripts.front().variant;
      std::string mode(to_string(transcripts.front().mode));
      EvalReport report = nav_report(transcripts, mode);
      write_text(run.dir() / "reports" / (std::string(to_string(v)) + "-" + mode + ".json"), report.to_json().dump(2) + "\n");
      by_mode[mode].emplace(v, report);
      const Universe& labels = v == Variant::rm ? real : synth;
      std::map<std::string, std::string> titles;
      for (const auto& id : corpus.retained_ids()) titles[id] = corpus.title(id, v);
      mentions[d.substr(5)] = external_mention_rate(transcripts, all_labels(labels), page_label_sets(corpus, v, labels), titles);
    }
    for (const auto& [mode, reports] : by_mode) {
      if (reports.count(Variant::rm) && reports.count(Variant::sm)) {
        nav_ka[mode] = knowledge_advantage(reports.at(Variant::rm), reports.at(Variant::sm));
        rows.push_back(nav_ka[mode]);
      }
    }
  }

  json qa_ka = json::array();
  if (!preds.empty()) {
    run.depends_on("qa");
    auto gold_of = [&](const char* file) {
      std::map<std::string, std::string> gold;
      for (const auto& q : load_qa_file((ctx.root / "qa" / file).string())) gold[q.pair_id] = q.answer;
      return gold;
    };
    auto gold_rm = gold_of("qa_rm.jsonl");
    auto gold_sm = gold_of("qa_sm.jsonl");
    for (const auto& p : preds) {
      const std::string condition = p.at("condition").get<std::string>();
      fs::path rp = resolve(ctx, p.at("rm").get<std::string>());
      fs::path sp = resolve(ctx, p.at("sm").get<std::string>());
      run.input_file("file:" + condition + ":rm", rp);
      run.input_file("file:" + condition + ":sm", sp);
      auto pr = read_predictions(rp);
      auto ps = read_predictions(sp);
      for (const auto* pm : {&pr, &ps}) {
        const auto& gold = pm == &pr ? gold_rm : gold_sm;
        for (const auto& [id, text] : *pm) {
          if (!gold.count(id)) throw AlignmentError("prediction for unknown pair id " + id + " (" + condition + ")");
        }
      }
      EvalReport r = qa_report(pr, gold_rm, Variant::rm, condition);
      EvalReport s = qa_report(ps, gold_sm, Variant::sm, condition);
      write_text(run.dir() / "reports" / ("rm-" + condition + ".json"), r.to_json().dump(2) + "\n");
      write_text(run.dir() / "reports" / ("sm-" + condition + ".json"), s.to_json().dump(2) + "\n");
      KaResult ka = knowledge_advantage(r, s);
      rows.push_back(ka);
      qa_ka.push_back(summarize_ka(ka).to_json());
    }
  }

  json summary = json::object();
  if (nav_ka.count("links_only")) {
    std::optional<KaResult> ext;
    if (nav_ka.count("content_links")) ext = nav_ka.at("content_links");
    summary["navigation"] = summarize_ka(nav_ka.at("links_only"), ext).to_json();
  } else if (nav_ka.count("content_links")) {
    summary["navigation"] = summarize_ka(nav_ka.at("content_links")).to_json();
  }
  summary["qa"] = qa_ka;
  summary["external_mention_rate"] = mentions;
  write_text(run.dir() / "ka_summary.json", summary.dump(2) + "\n");
  write_text(run.dir() / "ka_table.csv", ka_table_csv(rows));
  write_text(run.dir() / "ka_table.txt", ka_table_text(rows));
  return run.finish();
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"sample-universe", "perturb", "build-corpus", "build-qa",
                                              "build-nav",       "run-nav", "evaluate"};
  return names;
}

RunManifest run_stage(const std::string& name, const StageContext& ctx) {
  if (name == "sample-universe") return run_sample_universe(ctx);
  if (name == "perturb") return run_perturb(ctx);
  if (name == "build-corpus") return run_build_corpus(ctx);
  if (name == "build-qa") return run_build_qa(ctx);
  if (name == "build-nav") return run_build_nav(ctx);
  if (name == "run-nav") return run_run_nav(ctx);
  if (name == "evaluate") return run_evaluate(ctx);
  throw ConfigError("unknown stage '" + name + "'");
}

}  // namespace twinworld
