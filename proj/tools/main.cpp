// twinworld: stage-by-stage driver.
//
// Exit codes: 0 ok, 1 unexpected error, 2 config, 3 input (including stale
// upstream stages and alignment errors), 4 gate failure, 5 transport.

#include <iostream>

#include <CLI11.hpp>

#include "twinworld/errors.hpp"
#include "twinworld/pipeline.hpp"

namespace {

int exit_code(twinworld::ErrorKind kind) {
  switch (kind) {
    case twinworld::ErrorKind::config: return 2;
    case twinworld::ErrorKind::input: return 3;
    case twinworld::ErrorKind::gate: return 4;
    case twinworld::ErrorKind::transport: return 5;
  }
  return 1;
}

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> in_flight;
  bool mock = false;
  std::string variant;
  std::string mode;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel real/synthetic corpus pipeline"};
  app.set_version_flag("--version", std::string(TWINWORLD_VERSION));
  app.require_subcommand(1);

  Flags flags;
  std::string chosen;
  for (const auto& name : twinworld::stage_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", flags.config, "JSON config; unset keys keep their defaults");
    sub->add_option("--out", flags.out, "Run root directory")->required();
    sub->add_option("--seed", flags.seed, "Master seed; every stage seed derives from it");
    sub->add_option("--in-flight", flags.in_flight, "Concurrent generation calls")->check(CLI::PositiveNumber);
    sub->add_flag("--mock", flags.mock, "Use the offline mock generators (no network)");
    if (name == "run-nav") {
      sub->add_option("--variant", flags.variant, "rm or sm")->check(CLI::IsMember({"rm", "sm"}));
      sub->add_option("--mode", flags.mode, "links_only or content_links")
          ->check(CLI::IsMember({"links_only", "content_links"}));
    }
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto ctx = twinworld::make_context(flags.config, flags.out, flags.mock, flags.seed, flags.in_flight);
    if (!flags.variant.empty()) ctx.variant = twinworld::variant_from(flags.variant);
    if (!flags.mode.empty()) ctx.mode = twinworld::observation_mode_from(flags.mode);
    auto manifest = twinworld::run_stage(chosen, ctx);
    std::cout << manifest.stage << ": " << manifest.outputs.size() << " files in " << (ctx.root / manifest.directory).string()
              << " (" << manifest.wall_time_s << " s)\n";
    return 0;
  } catch (const twinworld::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
