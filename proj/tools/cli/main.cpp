#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "heattrace/errors.hpp"

using namespace heattrace::cli;

namespace {

// HEATTRACE_TOL_SCALE multiplies every tolerance of the run.
double tolerance_scale_from_env() {
  const char* raw = std::getenv("HEATTRACE_TOL_SCALE");
  if (raw == nullptr || *raw == '\0') return 1.0;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(v > 0.0) || !std::isfinite(v))
    throw heattrace::SchemaError(std::string("HEATTRACE_TOL_SCALE: expected a positive number, got '") + raw + "'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat equation trace toolkit: evaluate u from a trace triple, extract traces, run verification suites"};
  app.fallthrough();
  app.require_subcommand(1);

  Invocation inv;
  std::uint64_t seed = 0;
  app.add_option("--config", inv.config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--triple", inv.triple_path, "Trace triple (JSON measure document)")->check(CLI::ExistingFile);
  app.add_option("--fixture", inv.fixture, "Use a built-in fixture instead of --triple");
  app.add_option("--out", inv.out_dir, "Output directory")->capture_default_str();
  CLI::Option* seed_opt = app.add_option("--seed", seed, "Seed for randomized probe selection");
  app.add_flag("--strict", inv.strict, "Reject unknown config keys and treat warnings as failures");
  app.add_option("--mutate", inv.mutation, "Transform u before checking, e.g. scale:1.05");

  const std::pair<const char*, const char*> commands[] = {
      {"eval", "Evaluate u on the configured grid (solution.csv)"},
      {"traces", "Extract the trace triple of u (traces.json, trace_diagnostics.csv)"},
      {"roundtrip", "Build u from the triple and recover the triple from u"},
      {"oracle-compare", "Compare the representation formula with a Crank-Nicolson solution"},
      {"kernel-check", "Check identities of the Dirichlet heat kernel"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }
  inv.command = app.get_subcommands().front()->get_name();

  try {
    ConfigWarnings warnings;
    if (!inv.config_path.empty()) {
      std::ifstream in(inv.config_path, std::ios::binary);
      std::ostringstream text;
      text << in.rdbuf();
      inv.config = parse_config(text.str(), inv.strict, &warnings);
    }
    for (const std::string& key : warnings.unknown_keys) std::cerr << "warning: unknown config key " << key << "\n";
    if (*seed_opt) inv.config.seed = seed;
    scale_tolerances(inv.config, tolerance_scale_from_env());
    validate(inv.config);
  } catch (const heattrace::SchemaError& e) {
    std::cerr << "error: " << (inv.config_path.empty() ? "" : inv.config_path + ": ") << e.what() << "\n";
    return kUsage;
  }
  return run(inv, std::cout, std::cerr);
}
