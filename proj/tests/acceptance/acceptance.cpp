// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "conics/bruteforce.hpp"
#include "conics/instance.hpp"
#include "conics/solver.hpp"
#include "frac.hpp"
#include "expanded.hpp"

using namespace conics;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

int failures = 0;

void run(int n, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d: %s -%s\n", n, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
  std::fflush(stdout);
}

std::array<Complex, 8> coords(const ChartPoint<Complex>& pt) {
  return {pt.a[0], pt.a[1], pt.a[2], pt.b[0], pt.b[1], pt.b[2], pt.b[3], pt.b[4]};
}

double distance(const ChartPoint<Complex>& x, const ChartPoint<Complex>& y) {
  ChartPoint<Complex> xt;
  try {
    xt = transition(x, y.chart);
  } catch (const NotInChart&) {
    return INFINITY;
  }
  double d = 0.0;
  for (int k = 0; k < 8; ++k) d = std::max(d, std::abs(coords(xt)[k] - coords(y)[k]));
  return d;
}

ChartPoint<Complex> to_complex_point(const ChartPoint<Rational>& pt) {
  ChartPoint<Complex> out{pt.chart, {}, {}};
  for (int k = 0; k < 3; ++k) out.a[k] = pt.a[k].get_d();
  for (int k = 0; k < 5; ++k) out.b[k] = pt.b[k].get_d();
  return out;
}

ChartPoint<Rational> random_exact_point(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ci(0, 3), cj(0, 5), nd(-12, 12), dd(1, 7);
  ChartPoint<Rational> p{Chart(ci(rng), cj(rng)), {}, {}};
  for (auto& x : p.a) x = frac(nd(rng), dd(rng));
  for (auto& x : p.b) x = frac(nd(rng), dd(rng));
  return p;
}

struct Solved {
  std::uint64_t seed;
  Instance inst;
  SolutionSet set;
  double seconds;
};

std::vector<Solved> primary;

// Criteria 1-3 share these solves.
const std::uint64_t kSeeds[] = {42, 1, 2};
const std::uint64_t kExtraSeeds[] = {3, 4, 5, 6, 7};

void criterion1(Outcome& o) {
  for (std::uint64_t seed : kSeeds) {
    Instance inst = gen_random_instance(seed, 10);
    const auto t0 = std::chrono::steady_clock::now();
    SolutionSet set = solve_all(inst.lines);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto unit = to_complex(inst.lines, true);
    const auto raw = to_complex(inst.lines, false);
    double worst_res = 0.0, min_det = INFINITY;
    for (const auto& s : set.solutions)
      for (const auto& pt : {s.point, conjugate(s.point)}) {
        SectionSystem<Complex> u(pt.chart, unit), r(pt.chart, raw);
        for (const auto& v : u.eval(pt)) worst_res = std::max(worst_res, std::abs(v));
        min_det = std::min(min_det, std::abs(r.jacobian(pt).determinant));
      }
    o.detail << " seed " << seed << ": " << set.total() << " solutions, " << set.paths << " paths, residual "
             << num(worst_res) << ", min|det| " << num(min_det) << ", " << num(secs) << "s;";
    o.require(set.total() == 92, "count");
    o.require(set.paths == 448, "paths");
    o.require(worst_res < 1e-12, "residual");
    o.require(min_det > 1e-8, "determinant");
    o.require(secs < 300.0, "time");
    primary.push_back({seed, std::move(inst), std::move(set), secs});
  }
}

void criterion2(Outcome& o) {
  o.require(primary.size() == 3, "criterion 1 instances missing");
  const GwForm h46 = GwForm::hyperbolic(FieldTag::real(), 46);
  for (const auto& p : primary) {
    const GwForm sum = assemble_enriched_count(p.set);
    const GwInvariants inv = invariants(sum);
    o.detail << " seed " << p.seed << ": " << sum.str() << " (rank " << inv.rank << ", signature "
             << (inv.signature ? std::to_string(*inv.signature) : "-") << ");";
    o.require(gw_equal(sum, h46) == Verdict::Equal, "gw_equal");
    o.require(inv.rank == 92 && inv.signature == 0, "invariants");
  }
}

void criterion3(Outcome& o) {
  for (const auto& p : primary) {
    o.detail << " seed " << p.seed << ": " << p.set.positive() << "+/" << p.set.negative() << "-;";
    o.require(p.set.positive() == p.set.negative(), "balance");
  }
  for (std::uint64_t seed : kExtraSeeds) {
    const auto set = solve_all(gen_random_instance(seed, 10).lines);
    o.detail << " seed " << seed << ": " << set.positive() << "+/" << set.negative() << "-;";
    o.require(set.total() == 92 && set.positive() == set.negative(), "balance");
  }
  // Exchanging two lines is an odd permutation: every real conic changes sign.
  for (const auto& p : primary) {
    Lines8<Rational> swapped = p.inst.lines;
    std::swap(swapped[0], swapped[1]);
    const auto set = solve_all(swapped);
    int matched = 0, flipped = 0;
    for (const auto& s : set.solutions) {
      if (s.reality != Reality::Real) continue;
      for (const auto& t : p.set.solutions)
        if (t.reality == Reality::Real && distance(s.point, t.point) < 1e-8) {
          ++matched;
          flipped += s.sign == -t.sign;
        }
    }
    o.detail << " swap L0,L1 for seed " << p.seed << ": " << set.positive() << "+/" << set.negative() << "-, "
             << flipped << "/" << matched << " signs flipped;";
    o.require(set.positive() == p.set.negative() && set.negative() == p.set.positive(), "swap");
    o.require(matched == static_cast<int>(p.set.real_count()) && flipped == matched, "per-conic flip");
  }
}

void criterion4(Outcome& o) {
  for (std::uint64_t seed : {7, 5, 8}) {
    const Instance inst = gen_planted_instance(seed);
    const auto set = solve_all(inst.lines);
    const ChartPoint<Complex> target = to_complex_point(*inst.planted);
    double best = INFINITY;
    ChartPoint<Complex> hit;
    for (const auto& s : set.solutions)
      for (const auto& pt : {s.point, conjugate(s.point)}) {
        const double d = distance(pt, target);
        if (d < best) {
          best = d;
          hit = transition(pt, target.chart);
        }
      }
    const Rational det = SectionSystem<Rational>(Chart(0, 0), inst.lines).jacobian(*inst.planted).determinant;
    const Complex fdet = SectionSystem<Complex>(Chart(0, 0), to_complex(inst.lines)).jacobian(hit).determinant;
    const double rel = std::abs(fdet - det.get_d()) / std::abs(det.get_d());
    o.detail << " seed " << seed << ": distance " << num(best) << ", det " << num(det.get_d()) << ", float rel err "
             << num(rel) << ";";
    o.require(best < 1e-8, "recovery");
    o.require(det != 0, "exact det");
    o.require(rel < 1e-8, "float det");
  }
}

void criterion5(Outcome& o) {
  const Instance inst = gen_planted_instance(7);
  std::vector<JacobianRecord<Rational>> recs;
  for (const Chart& c : all_charts()) {
    try {
      const auto q = transition(*inst.planted, c);
      recs.push_back(SectionSystem<Rational>(c, inst.lines).jacobian(q));
    } catch (const NotInChart&) {
    }
  }
  int pairs = 0, square = 0;
  for (std::size_t a = 0; a < recs.size(); ++a)
    for (std::size_t b = a + 1; b < recs.size(); ++b) {
      ++pairs;
      square += recs[b].oriented != 0 && is_square(Rational(recs[a].oriented / recs[b].oriented));
    }
  o.detail << " planted seed 7: " << recs.size() << " charts, " << square << "/" << pairs
           << " chart pairs with square oriented ratio;";
  o.require(pairs >= 3 && square == pairs, "planted pairs");

  auto fq = [&](const char* label, const BruteForceResult<Fp>& res) {
    int ok = 0, nonsingular = 0;
    for (const auto& s : res.solutions) {
      if (s.singular()) continue;
      ++nonsingular;
      ok += chart_compatible(s);
    }
    o.detail << " " << label << ": " << ok << "/" << nonsingular << " nonsingular solutions compatible ("
             << res.solutions.size() - nonsingular << " singular);";
    o.require(ok == nonsingular, label);
  };
  // Most solutions mod 3 are singular; random seed 35 has several nonsingular ones.
  fq("F_3", brute_force_fq(reduce_lines(gen_random_instance(35, 10).lines, 3)));
  BruteForceOptions quick;
  quick.cross_check = false;
  fq("F_5", brute_force_fq(reduce_planted(gen_planted_instance(5), 5).lines, quick));
}

void criterion6(Outcome& o) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> nd(-9, 9), dd(1, 8);
  const Instance planted = gen_planted_instance(7);
  const Instance random = gen_random_instance(42, 10);
  int trials = 0, exact = 0;
  auto check = [&](const Lines8<Rational>& lines, const ChartPoint<Rational>& pt) {
    SectionSystem<Rational> sys(pt.chart, lines);
    const Rational base = sys.jacobian(pt).determinant;
    if (base == 0) return;
    for (int n = 0; n < 8; ++n)
      for (int which = 0; which < 2; ++which) {
        Rational lam(0);
        while (lam == 0) lam = frac(nd(rng), dd(rng));
        Point3<Rational> p = lines[n].p(), s = lines[n].s();
        for (auto& x : which ? s : p) x *= lam;
        Lines8<Rational> changed = lines;
        changed[n] = Line3<Rational>(p, s);
        const Rational det = SectionSystem<Rational>(pt.chart, changed).jacobian(pt).determinant;
        ++trials;
        const Rational ratio = det / base;
        exact += ratio == lam * lam && is_square(ratio);
      }
  };
  check(planted.lines, *planted.planted);
  for (int k = 0; k < 10; ++k) check(random.lines, random_exact_point(rng));
  o.detail << " " << exact << "/" << trials << " rescalings multiply det by lambda^2 exactly;";
  o.require(trials > 0 && exact == trials, "scaling");
}

void criterion7(Outcome& o) {
  std::mt19937_64 rng(7);
  const Instance random = gen_random_instance(42, 10);
  int agree = 0, total = 0;
  for (int k = 0; k < 10; ++k) {
    const auto pt = random_exact_point(rng);
    SectionSystem<Rational> sys(pt.chart, random.lines);
    ++total;
    agree += jacobian_via_laplace(sys, pt) == sys.jacobian(pt).determinant;
  }
  const Instance planted = gen_planted_instance(7);
  SectionSystem<Rational> psys(Chart(0, 0), planted.lines);
  const Rational pdet = psys.jacobian(*planted.planted).determinant;
  const bool planted_ok = jacobian_via_laplace(psys, *planted.planted) == pdet && pdet != 0;
  o.detail << " " << agree << "/" << total << " random exact points, planted " << (planted_ok ? "equal" : "differs")
           << ";";
  o.require(agree == total, "random points");
  o.require(planted_ok, "planted");
}

void criterion8(Outcome& o) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Instance inst = gen_random_instance(42, 10);
  const auto lines = to_double(inst.lines, true);
  const double h = 1e-6;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::uniform_int_distribution<int> ci(0, 3), cj(0, 5);
    ChartPoint<double> p{Chart(ci(rng), cj(rng)), {}, {}};
    for (auto& x : p.a) x = u(rng);
    for (auto& x : p.b) x = u(rng);
    SectionSystem<double> sys(p.chart, lines);
    const auto jac = sys.jacobian_matrix(p);
    for (int v = 0; v < 8; ++v) {
      auto plus = p, minus = p;
      (v < 3 ? plus.a[v] : plus.b[v - 3]) += h;
      (v < 3 ? minus.a[v] : minus.b[v - 3]) -= h;
      const auto fp = sys.eval(plus), fm = sys.eval(minus);
      for (int n = 0; n < 8; ++n) {
        const double fd = (fp[n] - fm[n]) / (2 * h);
        worst = std::max(worst, std::abs(fd - jac(v, n)) / std::max(1.0, std::abs(jac(v, n))));
      }
    }
  }
  int symbolic_ok = 0;
  for (int k = 0; k < 10; ++k) {
    const auto pt = random_exact_point(rng);
    SectionSystem<Rational> sys(pt.chart, inst.lines);
    const auto jac = sys.jacobian_matrix(pt);
    const auto phi = oracle::expanded_section(pt.chart.i, pt.chart.j, inst.lines);
    const auto x = oracle::flatten(pt);
    bool all = true;
    for (int n = 0; n < 8; ++n)
      for (int v = 0; v < 8; ++v) all = all && jac(v, n) == phi[n].derivative(v).eval(x);
    symbolic_ok += all;
  }
  o.detail << " finite differences: worst relative gap " << num(worst) << " over 20 points x 64 entries; symbolic: "
           << symbolic_ok << "/10 points exact;";
  o.require(worst < 1e-6, "finite differences");
  o.require(symbolic_ok == 10, "symbolic");
}

GwForm unit_of(const Fp& x) { return GwForm::unit(square_class(x)); }
GwForm unit_of(const Rational& x) { return GwForm::unit(square_class(x)); }
GwForm unit_of(double x) { return GwForm::unit(square_class(x)); }

template <class T>
GwForm rel3_rhs(const T& x, const T& y) {
  const T s = x + y;
  return unit_of(s) + unit_of(T(x * y * s));
}

// <a> + <-a> = H, one rewrite at a time through (iii) and (i).
template <class T>
bool replay_iv(const T& a) {
  const T one = one_like(a), am1 = a - one, a2ma = a * a - a;
  const GwForm h = unit_of(one) + unit_of(T(-one));
  const GwForm s1 = unit_of(a) + unit_of(T(-a));
  bool ok = rel3_rhs(T(-a), am1) == unit_of(a2ma) + unit_of(T(-one));
  const GwForm s2 = unit_of(a) + unit_of(a2ma) + unit_of(T(-one)) - unit_of(am1);
  const GwForm s3 = rel3_rhs(a, a2ma) + unit_of(T(-one)) - unit_of(am1);
  ok = ok && s3 == unit_of(T(a * a)) + unit_of(T(a * a * am1)) + unit_of(T(-one)) - unit_of(am1);
  ok = ok && unit_of(T(a * a)) == unit_of(one) && unit_of(T(a * a * am1)) == unit_of(am1);
  ok = ok && s3 == h;
  // Over Q invariants cannot prove the identity (the replay does); elsewhere they must.
  const Verdict v = gw_equal(s1, h);
  if constexpr (std::is_same_v<T, Rational>) ok = ok && v != Verdict::NotEqual;
  else ok = ok && v == Verdict::Equal && gw_equal(s2, h) == Verdict::Equal;
  return ok;
}

void criterion9(Outcome& o) {
  int fp_cases = 0, fp_ok = 0;
  for (std::uint64_t p : {3, 5, 7, 11, 13})
    for (std::uint64_t a = 1; a < p; ++a)
      for (std::uint64_t b = 1; b < p; ++b) {
        const Fp x(p, a), y(p, b);
        bool ok = gw_equal(unit_of(Fp(x * y * y)), unit_of(x)) == Verdict::Equal;
        ok = ok && gw_equal(unit_of(x) * unit_of(y), unit_of(Fp(x * y))) == Verdict::Equal;
        if (!is_zero(Fp(x + y))) ok = ok && gw_equal(unit_of(x) + unit_of(y), rel3_rhs(x, y)) == Verdict::Equal;
        ++fp_cases;
        fp_ok += ok;
      }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> real(-50.0, 50.0);
  std::uniform_int_distribution<int> nd(-40, 40), dd(1, 40);
  int r_ok = 0, q_ok = 0, q_proved = 0;
  for (int k = 0; k < 1000; ++k) {
    const double a = real(rng), b = real(rng);
    r_ok += gw_equal(unit_of(a * b * b), unit_of(a)) == Verdict::Equal &&
            gw_equal(unit_of(a) * unit_of(b), unit_of(a * b)) == Verdict::Equal &&
            gw_equal(unit_of(a) + unit_of(b), rel3_rhs(a, b)) == Verdict::Equal;
    int n1 = 0, n2 = 0;
    while (n1 == 0) n1 = nd(rng);
    while (n2 == 0) n2 = nd(rng);
    const Rational x = frac(n1, dd(rng)), y = frac(n2, dd(rng));
    bool ok = gw_equal(unit_of(Rational(x * y * y)), unit_of(x)) == Verdict::Equal &&
              gw_equal(unit_of(x) * unit_of(y), unit_of(Rational(x * y))) == Verdict::Equal;
    if (x + y != 0) {
      const Verdict v = gw_equal(unit_of(x) + unit_of(y), rel3_rhs(x, y));
      ok = ok && v != Verdict::NotEqual;
      q_proved += v == Verdict::Equal;
    }
    q_ok += ok;
  }
  int iv_cases = 0, iv_ok = 0;
  for (std::uint64_t p : {3, 5, 7, 11, 13})
    for (std::uint64_t a = 2; a < p; ++a) {
      ++iv_cases;
      iv_ok += replay_iv(Fp(p, a));
    }
  for (int n : {-7, -2, 2, 3, 5, 12}) {
    ++iv_cases;
    iv_ok += replay_iv(Rational(n));
  }
  std::uniform_real_distribution<double> cu(-10.0, 10.0);
  int tr_ok = 0;
  for (int k = 0; k < 100; ++k) {
    const Complex c(cu(rng), cu(rng));
    tr_ok += trace_form(c) == GwForm::hyperbolic(FieldTag::real());
  }
  QuadExtField f9(3, 1, 0);
  const bool f9_ok = gw_equal(trace_form(f9(1)), GwForm::hyperbolic(FieldTag::prime(3))) == Verdict::Equal;
  o.detail << " (i)-(iii) over F_p: " << fp_ok << "/" << fp_cases << "; over R: " << r_ok
           << "/1000; over Q: " << q_ok << "/1000 consistent (" << q_proved << " with (iii) decided); (iv) replay: "
           << iv_ok << "/" << iv_cases << "; Tr_C/R: " << tr_ok << "/100; Tr_F9/F3<1> = H: " << (f9_ok ? "yes" : "no")
           << ";";
  o.require(fp_ok == fp_cases && r_ok == 1000 && q_ok == 1000, "relations");
  o.require(iv_ok == iv_cases, "relation (iv)");
  o.require(tr_ok == 100 && f9_ok, "trace forms");
}

void criterion10(Outcome& o) {
  const auto res = brute_force_fq(reduce_lines(gen_random_instance(1, 10).lines, 3));
  o.detail << " F_3: " << res.candidates << " candidates, " << res.chart_evaluations << " chart evaluations, "
           << res.discrepancies << " discrepancies, " << res.solutions.size() << " solutions;";
  o.require(res.candidates == 14560, "candidate count");
  o.require(res.discrepancies == 0, "discrepancies");

  for (std::uint64_t seed : {5, 8}) {
    const Instance inst = gen_planted_instance(seed);
    const std::uint64_t p = first_good_prime(inst);
    const auto red = reduce_planted(inst, p);
    const auto found = brute_force_fq(red.lines);
    const auto k = find_solution(found, red.planted);
    o.detail << " planted seed " << seed << " at good prime " << p << ": " << (k ? "found" : "missing") << ", "
             << found.discrepancies << " discrepancies;";
    o.require(k.has_value(), "planted found");
    o.require(found.discrepancies == 0, "planted discrepancies");
  }
}

}  // namespace

int main() {
  run(1, criterion1);
  run(2, criterion2);
  run(3, criterion3);
  run(4, criterion4);
  run(5, criterion5);
  run(6, criterion6);
  run(7, criterion7);
  run(8, criterion8);
  run(9, criterion9);
  run(10, criterion10);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
