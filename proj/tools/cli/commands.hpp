#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace heattrace::cli {

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kUsage = 2, kUnattainable = 3 };

struct Invocation {
  std::string command;  // eval, traces, roundtrip, oracle-compare, kernel-check
  RunConfig config;
  std::string config_path;  // empty when defaults are used
  std::string triple_path;
  std::string fixture;      // a standard fixture instead of a triple file
  std::string mutation;     // optional "name:argument" applied to u
  std::string out_dir = "heattrace-out";
  bool strict = false;
};

/// Runs one command, writing its files under out_dir, a summary to `out`
/// and diagnostics to `err`. Returns the exit code.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Parses "scale:1.05", "time-growth:3", "time-blowup:0.1",
/// "boundary-blowup:1.5", "layer-oscillation:0.3" or "interior-band:0.5".
/// Throws SchemaError for anything else.
std::function<SolutionField(const SolutionField&)> parse_mutation(const std::string& spec);

/// Largest |u_fd(h, k) - u_fd(2h, 2k)| / 3 over the coarse nodes at times in
/// [t_lo, t_hi], relative to the largest |u_fd(h, k)| there.
double fd_error_estimate(const TraceTriple& triple, const Domain& domain, const RunConfig& config);

}  // namespace heattrace::cli
