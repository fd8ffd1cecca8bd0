// phidec command-line front end.
//
// exit codes: 0 feasible, 1 infeasible, 2 undetermined, 3 instance parse error,
// 4 usage error, 5 runtime failure

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "phidec/dilation.hpp"
#include "phidec/gamma.hpp"
#include "phidec/io.hpp"
#include "phidec/sdpa.hpp"
#include "phidec/selftest.hpp"

#ifndef PHIDEC_CORPUS_DIR
#define PHIDEC_CORPUS_DIR ""
#endif

using namespace phidec;

namespace {

constexpr int kExitFeasible = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUndetermined = 2;
constexpr int kExitParse = 3;
constexpr int kExitUsage = 4;
constexpr int kExitRuntime = 5;

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::feasible:
      return kExitFeasible;
    case Verdict::infeasible:
      return kExitInfeasible;
    case Verdict::undetermined:
      return kExitUndetermined;
  }
  return kExitUndetermined;
}

std::uint64_t env_seed() {
  if (const char* s = std::getenv("PHIDEC_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring malformed PHIDEC_SEED='" << s << "'\n";
    }
  }
  return 0;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const Instance& inst) {
  if (flag) return *flag;
  if (inst.seed) return *inst.seed;
  return env_seed();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CheckArgs {
  std::string instance;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  std::string json_out;
};

int cmd_check(const CheckArgs& args) {
  Instance inst = load_instance(args.instance);
  if (args.tol) inst.options.feas_rel_tol = *args.tol;
  if (args.max_iter) inst.options.max_iter = *args.max_iter;
  const std::uint64_t seed = resolve_seed(args.seed, inst);

  const auto t0 = std::chrono::steady_clock::now();
  const FeasibilityProblem prob(inst.target, inst.sequence, inst.options);
  const FeasibilityResult res = feasibility(prob);
  const VerdictReport report = make_report(res, prob, seconds_since(t0), seed);

  std::cout << "verdict: " << to_string(report.verdict) << "\n";
  std::cout << "kernel condition: " << (report.kernel_condition_holds ? "holds" : "fails") << "\n";
  std::cout << std::setprecision(6);
  if (report.certificate)
    std::cout << "certificate: residual " << report.residual << ", min eigenvalue " << report.min_eigenvalue << "\n";
  if (report.witness)
    std::cout << "witness: pairing " << report.pairing << ", min dual margin " << report.min_dual_margin << "\n";
  if (inst.sequence.kind() == SequenceKind::truncated_vanishing)
    std::cout << "tail slack: " << report.tail_slack << " per unit ||a||\n";
  std::cout << "iterations: " << report.iterations << ", wall time " << report.wall_time << " s, seed " << seed << "\n";
  if (!report.diagnostics.empty()) std::cout << "diagnostics: " << report.diagnostics << "\n";
  if (!reverify(report, prob)) {
    std::cerr << "error: report payload failed re-verification\n";
    return kExitRuntime;
  }
  if (!args.json_out.empty()) {
    write_json_file(to_json(report), args.json_out);
    std::cout << "report written to " << args.json_out << "\n";
  }
  return exit_code(report.verdict);
}

struct SearchArgs {
  std::string instance;
  Index n = 2;
  int restarts = 16;
  std::optional<std::uint64_t> seed;
};

int cmd_witness_search(const SearchArgs& args) {
  const Instance inst = load_instance(args.instance);
  Rng rng(resolve_seed(args.seed, inst));
  if (!inst.sequence.all_hs_isometries())
    std::cerr << "warning: sequence has non-isometric entries; falling back to rejection sampling of Gamma_n^+\n";
  const auto rep = criterion_violation_search(inst.target, inst.sequence, args.n, args.restarts, rng);
  std::cout << std::setprecision(6);
  if (!rep.violation) {
    std::cout << "none_found (best value " << rep.value << ", n = " << args.n << ", restarts " << args.restarts << ")\n";
    return kExitUndetermined;
  }
  const auto check = verify_violation(inst.target, inst.sequence, rep.a, rep.v);
  if (!check.valid) {
    std::cerr << "error: reported violation failed re-verification\n";
    return kExitRuntime;
  }
  std::cout << "violation: value " << check.value << ", membership margin " << check.membership_margin
            << ", n = " << args.n << "\n";
  return kExitInfeasible;
}

struct DilateArgs {
  std::string instance;
  std::string json_out;
};

int cmd_dilate(const DilateArgs& args) {
  const Instance inst = load_instance(args.instance);
  const FeasibilityProblem prob(inst.target, inst.sequence, inst.options);
  const auto res = feasibility(prob);
  if (res.verdict != Verdict::feasible) {
    std::cerr << "error: instance is " << to_string(res.verdict) << "; a dilation needs a certificate\n";
    return kExitRuntime;
  }
  const BlockDilation dil = block_dilation(*res.certificate, prob);
  const Index d = prob.in_dim();
  double residual = 0.0;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      const Matrix e = matrix_unit(d, i, j);
      residual = std::max(residual, (dil.reconstruct(e) - prob.target().apply(e)).norm());
    }

  const Eigen::IOFormat fmt(6, 0, ", ", "\n", "  [", "]");
  std::cout << "dilation space: dim K = " << dil.dim << " = ";
  for (size_t k = 0; k < dil.parts.size(); ++k)
    std::cout << (k ? " + " : "") << dil.parts[k].dilation_dim() << " (rank " << dil.parts[k].rank << ")";
  std::cout << "\n";
  for (size_t k = 0; k < dil.parts.size(); ++k) {
    std::cout << "block " << k << ": offset " << dil.offsets[k] << ", " << dil.parts[k].kraus.size() << " Kraus operators\n";
    for (size_t i = 0; i < dil.parts[k].kraus.size(); ++i)
      std::cout << " K_" << k << "," << i << " =\n" << dil.parts[k].kraus[i].format(fmt) << "\n";
  }
  std::cout << "V =\n" << dil.v.format(fmt) << "\n";
  std::cout << std::setprecision(6) << "reconstruction residual (max over matrix units): " << residual << "\n";

  if (!args.json_out.empty()) {
    json j;
    j["dim"] = dil.dim;
    j["offsets"] = dil.offsets;
    j["v"] = to_json(dil.v);
    j["residual"] = residual;
    json parts = json::array();
    for (const auto& p : dil.parts) {
      json kraus = json::array();
      for (const auto& k : p.kraus) kraus.push_back(to_json(k));
      parts.push_back({{"rank", p.rank}, {"kraus", std::move(kraus)}, {"v", to_json(p.v)}});
    }
    j["parts"] = std::move(parts);
    write_json_file(j, args.json_out);
  }
  return kExitFeasible;
}

int cmd_export_sdpa(const std::string& instance, const std::string& out) {
  const Instance inst = load_instance(instance);
  const FeasibilityProblem prob(inst.target, inst.sequence, inst.options);
  export_sdpa(prob, out);
  std::cout << "wrote " << out << " (" << prob.terms() << " blocks of size " << 2 * prob.choi_dim() << ")\n";
  return 0;
}

int cmd_verify_report(const std::string& instance, const std::string& report_path) {
  const Instance inst = load_instance(instance);
  const FeasibilityProblem prob(inst.target, inst.sequence, inst.options);
  const VerdictReport report = report_from_json(read_json_file(report_path));
  const bool ok = reverify(report, prob);
  std::cout << to_string(report.verdict) << " report " << (ok ? "re-verifies" : "does NOT re-verify") << "\n";
  return ok ? 0 : 1;
}

struct SelftestArgs {
  bool quick = false;
  bool full = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string corpus = PHIDEC_CORPUS_DIR;
};

int cmd_selftest(const SelftestArgs& args) {
  SelftestConfig cfg;
  cfg.full = args.full;
  cfg.seed = args.seed ? *args.seed : env_seed();
  if (args.tol) cfg.options.feas_rel_tol = *args.tol;
  if (!args.corpus.empty()) cfg.corpus_dir = args.corpus;
  const auto results = run_selftest(cfg);
  std::cout << "selftest " << (cfg.full ? "full" : "quick") << ", seed " << cfg.seed << "\n" << format_summary(results);
  for (const auto& r : results)
    if (!r.passed()) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decomposability of linear maps between matrix algebras"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CheckArgs check;
  auto* c = app.add_subcommand("check", "decide membership; writes certificate or witness");
  c->add_option("instance", check.instance, "instance JSON")->required()->check(CLI::ExistingFile);
  c->add_option("--tol", check.tol, "relative residual tolerance")->check(CLI::PositiveNumber);
  c->add_option("--max-iter", check.max_iter, "iteration budget")->check(CLI::PositiveNumber);
  c->add_option("--seed", check.seed, "seed (default: instance, then PHIDEC_SEED)");
  c->add_option("--json-out", check.json_out, "write the verdict report here");

  SearchArgs search;
  auto* w = app.add_subcommand("witness-search", "search Gamma_n^+ for a criterion violation");
  w->add_option("instance", search.instance, "instance JSON")->required()->check(CLI::ExistingFile);
  w->add_option("--n", search.n, "block size n")->check(CLI::Range(1, 8));
  w->add_option("--restarts", search.restarts, "independent restarts")->check(CLI::PositiveNumber);
  w->add_option("--seed", search.seed, "seed");

  DilateArgs dilate;
  auto* dl = app.add_subcommand("dilate", "Stinespring-type dilation of a feasible instance");
  dl->add_option("instance", dilate.instance, "instance JSON")->required()->check(CLI::ExistingFile);
  dl->add_option("--json-out", dilate.json_out, "write V and Kraus sets here");

  std::string sdpa_in, sdpa_out;
  auto* ex = app.add_subcommand("export-sdpa", "export the feasibility SDP in SDPA sparse format");
  ex->add_option("instance", sdpa_in, "instance JSON")->required()->check(CLI::ExistingFile);
  ex->add_option("out", sdpa_out, "output .dat-s path")->required();

  std::string vr_instance, vr_report;
  auto* vr = app.add_subcommand("verify-report", "re-verify a saved verdict report");
  vr->add_option("instance", vr_instance, "instance JSON")->required()->check(CLI::ExistingFile);
  vr->add_option("report", vr_report, "report JSON")->required()->check(CLI::ExistingFile);

  SelftestArgs st;
  auto* s = app.add_subcommand("selftest", "run the property suites");
  auto* quick = s->add_flag("--quick", st.quick, "reduced counts (default)");
  s->add_flag("--full", st.full, "full counts")->excludes(quick);
  s->add_option("--seed", st.seed, "seed (default: PHIDEC_SEED, then 0)");
  s->add_option("--tol", st.tol, "relative residual tolerance")->check(CLI::PositiveNumber);
  s->add_option("--corpus", st.corpus, "corpus directory checked against \"expect\" fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (c->parsed()) return cmd_check(check);
    if (w->parsed()) return cmd_witness_search(search);
    if (dl->parsed()) return cmd_dilate(dilate);
    if (ex->parsed()) return cmd_export_sdpa(sdpa_in, sdpa_out);
    if (vr->parsed()) return cmd_verify_report(vr_instance, vr_report);
    if (s->parsed()) return cmd_selftest(st);
  } catch (const NotHermitianError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
