#pragma once
// Stage drivers behind the command-line tool. Every stage writes its outputs
// under one directory of the run root together with a run_manifest.json that
// fingerprints inputs, config and outputs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinworld/corpus_builder.hpp"
#include "twinworld/nav_env.hpp"

namespace twinworld {

inline constexpr const char* kManifestName = "run_manifest.json";

struct RunManifest {
  std::string stage;
  std::string directory;                        // relative to the run root
  std::map<std::string, std::string> inputs;   // upstream directory or input file -> fingerprint
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  std::map<std::string, std::string> outputs;  // relative path -> sha256
  std::string version;
  double wall_time_s = 0.0;

  // Hash of the output fingerprints; what downstream stages record.
  std::string fingerprint() const;
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

RunManifest load_manifest(const std::filesystem::path& stage_dir);

// Checks that a stage's outputs on disk still match its manifest and that
// every upstream stage it consumed is unchanged. Throws DependencyError naming
// the stage to re-run.
RunManifest verify_stage(const std::filesystem::path& root, const std::string& directory);

// Files under the run root not listed by any manifest (manifests excluded).
std::vector<std::string> orphan_files(const std::filesystem::path& root);

struct StageContext {
  std::filesystem::path root;                  // --out
  nlohmann::json config;                       // merged over the defaults
  std::filesystem::path config_dir;            // relative paths in config resolve here
  bool mock = false;
  std::optional<Variant> variant;
  std::optional<ObservationMode> mode;
};

// Deep-merges `overrides` into the built-in defaults.
nlohmann::json merge_config(const nlohmann::json& overrides);
nlohmann::json default_config();
// Reads the file (if any) and applies --seed / --in-flight overrides.
StageContext make_context(const std::string& config_path, const std::string& out, bool mock,
                          std::optional<std::uint64_t> seed, std::optional<int> in_flight);

RunManifest run_sample_universe(const StageContext& ctx);
RunManifest run_perturb(const StageContext& ctx);
RunManifest run_build_corpus(const StageContext& ctx);
RunManifest run_build_qa(const StageContext& ctx);
RunManifest run_build_nav(const StageContext& ctx);
RunManifest run_run_nav(const StageContext& ctx);
RunManifest run_evaluate(const StageContext& ctx);

RunManifest run_stage(const std::string& name, const StageContext& ctx);
const std::vector<std::string>& stage_names();

std::vector<NavTask> load_nav_tasks(const std::string& path);

}  // namespace twinworld
