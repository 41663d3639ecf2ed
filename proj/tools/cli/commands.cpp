#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "heattrace/errors.hpp"
#include "json.hpp"

namespace heattrace::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

struct OutputFile {
  std::string name;
  std::string contents;
  std::string describes;
};

// Collects outputs and writes them with the manifest once the command is done.
class Outputs {
 public:
  Outputs(const Invocation& inv, std::string input_hash) : inv_(inv), input_hash_(std::move(input_hash)) {}

  void add(std::string name, std::string contents, std::string describes) {
    files_.push_back({std::move(name), std::move(contents), std::move(describes)});
  }

  void write(const std::string& status) const {
    const fs::path dir(inv_.out_dir);
    std::vector<fs::path> inputs;
    for (const std::string& p : {inv_.config_path, inv_.triple_path})
      if (!p.empty()) inputs.push_back(fs::weakly_canonical(p));

    json manifest;
    manifest["tool"] = "heattrace";
    manifest["version"] = HEATTRACE_VERSION;
    manifest["command"] = inv_.command;
    manifest["config_hash"] = hash_label(fnv1a64(canonical_json(inv_.config)));
    manifest["input"] = inv_.fixture.empty() ? json(nullptr) : json(inv_.fixture);
    manifest["input_hash"] = input_hash_.empty() ? json(nullptr) : json(input_hash_);
    manifest["mutation"] = inv_.mutation.empty() ? json(nullptr) : json(inv_.mutation);
    manifest["status"] = status;
    json list = json::array();
    for (const OutputFile& f : files_)
      list.push_back({{"file", f.name}, {"hash", hash_label(fnv1a64(f.contents))}, {"contents", f.describes}});
    manifest["outputs"] = std::move(list);
    manifest["config"] = nlohmann::json::parse(canonical_json(inv_.config));

    std::vector<OutputFile> all = files_;
    all.push_back({"manifest.json", manifest.dump(2) + "\n", ""});
    for (const OutputFile& f : all) {
      const fs::path target = fs::weakly_canonical(dir / f.name);
      if (std::find(inputs.begin(), inputs.end(), target) != inputs.end())
        throw SchemaError("output '" + target.string() + "' would overwrite an input");
    }
    fs::create_directories(dir);
    for (const OutputFile& f : all) {
      std::ofstream o(dir / f.name, std::ios::binary | std::ios::trunc);
      o << f.contents;
      if (!o) throw SchemaError("cannot write '" + (dir / f.name).string() + "'");
    }
  }

 private:
  const Invocation& inv_;
  std::string input_hash_;
  std::vector<OutputFile> files_;
};

struct Source {
  TraceTriple triple;
  std::string hash;
};

Source load_triple(const Invocation& inv, const Domain& domain) {
  if (!inv.fixture.empty() && !inv.triple_path.empty()) throw SchemaError("give either --triple or --fixture, not both");
  Source s;
  if (!inv.fixture.empty()) {
    try {
      s.triple = fixture(inv.fixture);
    } catch (const InvalidArgument& e) {
      throw SchemaError(e.what());
    }
    s.hash = hash_label(fnv1a64(serialize_triple(s.triple)));
  } else if (!inv.triple_path.empty()) {
    const std::string text = read_file(inv.triple_path);
    s.triple = parse_triple(text, domain);
    s.hash = hash_label(fnv1a64(text));
  } else {
    throw SchemaError(inv.command + ": a triple is required (--triple PATH or --fixture NAME)");
  }
  if (s.triple.horizon != inv.config.horizon)
    throw SchemaError("triple horizon " + std::to_string(s.triple.horizon) + " differs from the configured horizon " +
                      std::to_string(inv.config.horizon));
  return s;
}

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v))
    throw SchemaError(what + ": expected a number, got '" + text + "'");
  return v;
}

SolutionField mutated_by(const std::function<SolutionField(const SolutionField&)>& m, SolutionField u) {
  return m ? m(u) : u;
}

int report_status(const SuiteReport& r, std::ostream& out) {
  out << report_table(r);
  return r.passed() ? kPass : kCheckFailure;
}

int cmd_eval(const Invocation& inv, Outputs& files, const Source& src, const Domain& domain, std::ostream& out,
             std::ostream& err, std::string& status) {
  const RunConfig& c = inv.config;
  const HeatKernel kernel(domain, KernelOptions{c.kernel_tolerance});
  const SolutionField u = mutated_by(parse_mutation(inv.mutation), make_solution_field(src.triple, kernel, c.representation()));
  const GridSpec spec = c.make_grid(domain);
  validate_grid(spec, domain, c.horizon);
  const GridField g = evaluate_on_grid(u, spec);
  std::ostringstream csv;
  write_grid_csv(g, domain.kind() == DomainKind::Rectangle, csv);
  files.add("solution.csv", csv.str(),
            "u(x,t) from the heat representation formula (bottom, corner and lateral kernel terms) with certified "
            "error bounds");
  const double worst = g.errors.empty() ? 0.0 : *std::max_element(g.errors.begin(), g.errors.end());
  out << "eval: " << g.values.size() << " points, largest error bound " << worst << "\n";
  const bool within = worst <= c.quadrature_tolerance;
  if (!within) err << "warning: error bounds exceed the quadrature tolerance " << c.quadrature_tolerance << "\n";
  status = within ? "pass" : "warning";
  return within || !inv.strict ? kPass : kCheckFailure;
}

int cmd_traces(const Invocation& inv, Outputs& files, const Source& src, const Domain& domain, std::ostream& out,
               std::ostream& err, std::string& status) {
  const RunConfig& c = inv.config;
  const HeatKernel kernel(domain, KernelOptions{c.kernel_tolerance});
  const SolutionField u = mutated_by(parse_mutation(inv.mutation), make_solution_field(src.triple, kernel, c.representation()));
  const TraceReport r = extract_traces(u, c.make_schedule(), c.traces());
  files.add("traces.json", serialize_trace_report(r),
            "estimated initial trace (mu, lambda) from the Riesz-Martin decomposition of the limiting Green "
            "potential, and lateral trace nu from shrinking-boundary integrals");
  files.add("trace_diagnostics.csv", trace_diagnostics_csv(r),
            "convergence tables of every extrapolated limit: level, abscissa, sample, extrapolated value, residual");
  std::size_t flagged = 0;
  for (const LimitEstimate& e : r.diagnostics)
    if (!e.converged) {
      ++flagged;
      err << "not converged: " << e.name << " (residual " << e.residual << ")\n";
    }
  out << "traces: " << r.mu_estimate.atoms.size() << " interior atoms, corner masses";
  if (r.lambda_estimate.atoms.empty()) out << " none";
  for (const CornerAtom& a : r.lambda_estimate.atoms) out << " " << to_string(a.side) << "=" << a.mass;
  out << ", " << r.lateral_bins.size() << " lateral bins, " << flagged << " unconverged limits\n";
  status = r.converged ? "pass" : "not converged";
  return r.converged ? kPass : kCheckFailure;
}

int cmd_roundtrip(const Invocation& inv, Outputs& files, const Source& src, const Domain& domain, std::ostream& out,
                  std::string& status) {
  SuiteReport r = roundtrip(src.triple, domain, inv.config.roundtrip_options(), parse_mutation(inv.mutation));
  r.sort();
  files.add("roundtrip.json", report_json(r),
            "extracted trace triple against the input triple, and the split of u into its nu part and (mu, lambda) "
            "part");
  status = r.passed() ? "pass" : "fail";
  return report_status(r, out);
}

int cmd_oracle(const Invocation& inv, Outputs& files, const Source& src, const Domain& domain, std::ostream& out,
               std::ostream& err, std::string& status) {
  const double fd_error = fd_error_estimate(src.triple, domain, inv.config);
  const double needed = src.triple.mu.atoms.empty() ? inv.config.acceptance_tolerance
                                                    : 10.0 * inv.config.acceptance_tolerance;
  if (needed < 2.0 * fd_error) {
    err << "acceptance tolerance " << needed << " is below twice the finite-difference error estimate " << fd_error
        << " at h = " << inv.config.oracle.h << ", k = " << inv.config.oracle.k << "\n";
    status = "unattainable";
    return kUnattainable;
  }
  SuiteReport r = oracle_compare(src.triple, domain, inv.config.oracle_options(), parse_mutation(inv.mutation));
  r.sort();
  files.add("oracle.json", report_json(r),
            "heat representation formula against a Crank-Nicolson solution at random interior probes");
  status = r.passed() ? "pass" : "fail";
  return report_status(r, out);
}

int cmd_kernels(const Invocation& inv, Outputs& files, const Domain& domain, std::ostream& out, std::string& status) {
  SuiteReport r = check_kernels(domain, inv.config.kernel_suite());
  r.sort();
  files.add("kernels.json", report_json(r),
            "Dirichlet heat kernel identities: semigroup, symmetry, positivity, spectral against image sums");
  status = r.passed() ? "pass" : "fail";
  return report_status(r, out);
}

}  // namespace

std::function<SolutionField(const SolutionField&)> parse_mutation(const std::string& spec) {
  if (spec.empty()) return {};
  const std::size_t colon = spec.find(':');
  if (colon == std::string::npos) throw SchemaError("mutation '" + spec + "': expected name:argument");
  const std::string name = spec.substr(0, colon);
  const double arg = parse_number(spec.substr(colon + 1), "mutation " + name);
  if (name == "scale") return [arg](const SolutionField& u) { return mutations::scale(u, arg); };
  if (name == "time-growth") return [arg](const SolutionField& u) { return mutations::time_growth(u, arg); };
  if (name == "time-blowup") return [arg](const SolutionField& u) { return mutations::time_blowup(u, arg); };
  if (name == "boundary-blowup") return [arg](const SolutionField& u) { return mutations::boundary_blowup(u, arg); };
  if (name == "layer-oscillation")
    return [arg](const SolutionField& u) { return mutations::layer_oscillation(u, arg); };
  if (name == "interior-band") return [arg](const SolutionField& u) { return mutations::interior_band(u, arg); };
  throw SchemaError("mutation '" + name + "': unknown");
}

double fd_error_estimate(const TraceTriple& triple, const Domain& domain, const RunConfig& c) {
  const FDData data = fd_data(triple, domain);
  const FDSolution fine = fd_solve(domain, data, c.horizon, {c.oracle.h, c.oracle.k, 2});
  const FDSolution coarse = fd_solve(domain, data, c.horizon, {2.0 * c.oracle.h, 2.0 * c.oracle.k, 2});
  double diff = 0.0, scale = 0.0;
  for (int j = 0; j <= coarse.steps(); ++j) {
    const double t = j * coarse.k();
    if (t < c.oracle.t_lo || t > c.oracle.t_hi) continue;
    for (int i = 1; i < coarse.panels(); ++i) {
      const double x = coarse.a() + i * coarse.h();
      const double u = fine.at(x, t);
      diff = std::max(diff, std::abs(u - coarse.node(i, j)) / 3.0);
      scale = std::max(scale, std::abs(u));
    }
  }
  return scale > 0.0 ? diff / scale : diff;
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    const std::vector<std::string> bad = unattainable_tolerances(inv.config);
    if (!bad.empty()) {
      for (const std::string& name : bad)
        err << name << " is below " << kToleranceFloor << ", which double precision cannot certify\n";
      return kUnattainable;
    }
    const Domain domain = inv.config.make_domain();
    std::string status;
    int code = kPass;
    if (inv.command == "kernel-check") {
      Outputs files(inv, "");
      code = cmd_kernels(inv, files, domain, out, status);
      files.write(status);
      return code;
    }
    const Source src = load_triple(inv, domain);
    Outputs files(inv, src.hash);
    if (inv.command == "eval")
      code = cmd_eval(inv, files, src, domain, out, err, status);
    else if (inv.command == "traces")
      code = cmd_traces(inv, files, src, domain, out, err, status);
    else if (inv.command == "roundtrip")
      code = cmd_roundtrip(inv, files, src, domain, out, status);
    else if (inv.command == "oracle-compare")
      code = cmd_oracle(inv, files, src, domain, out, err, status);
    else
      throw SchemaError("unknown command '" + inv.command + "'");
    files.write(status);
    return code;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kCheckFailure;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace heattrace::cli
