// conics: command line front end.
//
// Exit status: 0 success, 1 a verification or count check failed, 2 usage or
// input error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "conics/bruteforce.hpp"
#include "conics/io.hpp"
#include "conics/verify.hpp"

using namespace conics;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InstanceArgs {
  std::string lines;
  std::optional<std::uint64_t> random;
  std::optional<std::uint64_t> planted;
  int bound = 10;

  void add(CLI::App* cmd, bool with_planted) {
    auto* l = cmd->add_option("--lines", lines, "JSON file with 8 lines")->check(CLI::ExistingFile);
    auto* r = cmd->add_option("--random", random, "generate a random integer instance from this seed");
    cmd->add_option("--bound", bound, "coordinate bound for --random")->check(CLI::Range(1, 1000000));
    l->excludes(r);
    if (with_planted) {
      auto* p = cmd->add_option("--planted", planted, "generate a planted instance from this seed");
      p->excludes(l)->excludes(r);
    }
  }

  Instance load() const {
    if (!lines.empty()) return load_instance(lines);
    if (random) return gen_random_instance(*random, bound);
    if (planted) return gen_planted_instance(*planted);
    throw UsageError("an instance is required (--lines, --random or --planted)");
  }
};

struct SolverArgs {
  SolverOptions opts;
  std::string chart = "0,0";

  void add(CLI::App* cmd) {
    cmd->add_option("--seed", opts.seed, "seed for start system, patches and gamma");
    cmd->add_option("--chart", chart, "chart i,j with 0 <= i <= 3, 0 <= j <= 5");
    cmd->add_option("--tol-residual", opts.tol_residual, "residual bound for accepted solutions");
    cmd->add_option("--tol-dedup", opts.tol_dedup, "relative distance under which endpoints coincide");
    cmd->add_option("--max-steps", opts.max_steps, "step budget per path");
    cmd->add_option("--max-retries", opts.max_retries, "re-tracking rounds when fewer than 92 are found");
    cmd->add_flag("--total-degree", opts.total_degree, "use the 6561-path total degree start system");
    cmd->add_option("--threads", opts.threads, "worker threads (0: all cores)");
  }

  SolverOptions resolve() {
    const auto comma = chart.find(',');
    if (comma == std::string::npos) throw UsageError("--chart expects i,j");
    try {
      opts.chart = Chart(std::stoi(chart.substr(0, comma)), std::stoi(chart.substr(comma + 1)));
    } catch (const std::exception&) {
      throw UsageError("--chart expects i,j with 0 <= i <= 3, 0 <= j <= 5");
    }
    return opts;
  }
};

void emit(const json& j, const std::string& out) {
  if (out.empty())
    std::cout << j.dump(2) << '\n';
  else
    save_json(j, out);
}

int run_solve(InstanceArgs& in, SolverArgs& sa, const std::string& out) {
  const Instance inst = in.load();
  const SolverOptions opts = sa.resolve();
  try {
    emit(to_json(solve_all(inst.lines, opts)), out);
    return kOk;
  } catch (const CountMismatch& e) {
    emit(to_json(e.partial()), out);
    std::cerr << "conics: " << e.what() << '\n';
    return kFailed;
  }
}

int run_verify(InstanceArgs& in, SolverArgs& sa, VerifyOptions vo, const std::string& out) {
  const Instance inst = in.load();
  vo.solver = sa.resolve();
  const VerificationReport rep = verify(inst, vo);
  emit(to_json(rep), out);
  for (const auto& c : rep.checks)
    if (!c.passed) std::cerr << "FAIL " << c.name << ": " << c.detail << '\n';
  return rep.passed() ? kOk : kFailed;
}

template <class T>
bool brute_ok(const BruteForceResult<T>& r) {
  if (r.discrepancies != 0) return false;
  for (const auto& s : r.solutions)
    if (!s.singular() && !chart_compatible(s)) return false;
  return true;
}

int run_bruteforce(InstanceArgs& in, std::uint64_t p, int degree, BruteForceOptions bo, const std::string& out) {
  const Instance inst = in.load();
  Lines8<Fp> lines = [&] {
    try {
      return inst.planted ? reduce_planted(inst, p).lines : reduce_lines(inst.lines, p);
    } catch (const std::exception& e) {
      throw UsageError(std::string("cannot reduce the lines mod ") + std::to_string(p) + ": " + e.what());
    }
  }();
  json j;
  bool ok;
  if (degree == 1) {
    const auto r = brute_force_fq(lines, bo);
    j = to_json(r);
    ok = brute_ok(r);
    if (inst.planted) {
      const bool found = find_solution(r, reduce_point(*inst.planted, p)).has_value();
      j["planted_found"] = found;
      ok = ok && found;
    }
  } else {
    const auto r = brute_force_fq2(lines, bo);
    j = to_json(r);
    ok = brute_ok(r);
    if (inst.planted) {
      const bool found = find_solution(r, embed_point(reduce_point(*inst.planted, p))).has_value();
      j["planted_found"] = found;
      ok = ok && found;
    }
  }
  emit(j, out);
  return ok ? kOk : kFailed;
}

json invariants_json(const GwForm& f) {
  const GwInvariants inv = invariants(f);
  json j = to_json(f);
  j["rank"] = inv.rank;
  j["signature"] = inv.signature ? json(*inv.signature) : json(nullptr);
  j["discriminant"] = inv.discriminant.str();
  j["effective"] = f.effective();
  return j;
}

int run_gw(const std::string& expr, const std::string& field_name, const std::string& compare, const std::string& out) {
  FieldTag field;
  GwForm f(FieldTag::real()), g(FieldTag::real());
  try {
    field = FieldTag::parse(field_name);
    f = parse_gw(expr, field);
    if (!compare.empty()) g = parse_gw(compare, field);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  json j = invariants_json(f);
  int code = kOk;
  if (!compare.empty()) {
    const Verdict v = gw_equal(f, g);
    j["compare"] = invariants_json(g);
    j["verdict"] = to_string(v);
    if (v != Verdict::Equal) code = kFailed;
  }
  emit(j, out);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conics meeting eight lines in P^3: solver, enriched count and checks"};
  app.require_subcommand(1);
  std::string out;

  InstanceArgs solve_in, verify_in, brute_in;
  SolverArgs solve_sa, verify_sa;

  auto* solve = app.add_subcommand("solve", "track all paths and print the 92 solutions");
  solve_in.add(solve, true);
  solve_sa.add(solve);
  solve->add_option("--out", out, "write JSON here instead of stdout");

  VerifyOptions vo;
  bool no_perm = false;
  auto* ver = app.add_subcommand("verify", "solve, assemble the enriched count and run every check");
  verify_in.add(ver, true);
  verify_sa.add(ver);
  ver->add_option("--samples", vo.samples, "solutions of each kind used for the section checks");
  ver->add_flag("--no-permutation", no_perm, "skip the re-solve with two lines swapped");
  ver->add_option("--out", out, "write JSON here instead of stdout");

  std::uint64_t planted_seed = 1;
  auto* planted = app.add_subcommand("planted", "write a planted instance as JSON");
  planted->add_option("--seed", planted_seed, "generator seed");
  planted->add_option("--out", out, "write JSON here instead of stdout");

  std::uint64_t p = 3;
  int degree = 1;
  bool no_cross = false;
  BruteForceOptions bo;
  auto* brute = app.add_subcommand("bruteforce", "enumerate all zeros over F_p or F_{p^2}");
  brute->add_option("--p", p, "odd prime")->required();
  brute_in.add(brute, true);
  brute->add_option("--degree", degree, "1 for F_p, 2 for F_{p^2}")->check(CLI::IsMember({1, 2}));
  brute->add_flag("--no-cross-check", no_cross, "compare with the incidence oracle only at solutions");
  brute->add_option("--threads", bo.threads, "worker threads (0: all cores)");
  brute->add_option("--out", out, "write JSON here instead of stdout");

  std::string expr, field = "R", compare;
  auto* gw = app.add_subcommand("gw", "evaluate a Grothendieck-Witt expression such as \"<1>+<-1>\" or \"46*H\"");
  gw->add_option("expr", expr, "expression")->required();
  gw->add_option("--field", field, "R, Q, C or F<p>");
  gw->add_option("--compare", compare, "second expression; exit 1 unless provably equal");
  gw->add_option("--out", out, "write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*solve) return run_solve(solve_in, solve_sa, out);
    if (*ver) {
      vo.permutation = !no_perm;
      return run_verify(verify_in, verify_sa, vo, out);
    }
    if (*planted) {
      emit(instance_to_json(gen_planted_instance(planted_seed)), out);
      return kOk;
    }
    if (*brute) {
      bo.cross_check = !no_cross;
      return run_bruteforce(brute_in, p, degree, bo, out);
    }
    if (*gw) return run_gw(expr, field, compare, out);
  } catch (const UsageError& e) {
    std::cerr << "conics: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidInput& e) {
    std::cerr << "conics: " << e.what() << '\n';
    return kUsage;
  } catch (const TooLarge& e) {
    std::cerr << "conics: " << e.what() << '\n';
    return kUsage;
  } catch (const ExhaustedRetries& e) {
    std::cerr << "conics: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "conics: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
