#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "conics/instance.hpp"
#include "conics/solver.hpp"

using namespace conics;

namespace {

std::array<Complex, 8> coords(const ChartPoint<Complex>& pt) {
  return {pt.a[0], pt.a[1], pt.a[2], pt.b[0], pt.b[1], pt.b[2], pt.b[3], pt.b[4]};
}

// Relative sup-distance after moving x into y's chart; infinity when x is
// not in that chart.
double distance(const ChartPoint<Complex>& x, const ChartPoint<Complex>& y) {
  ChartPoint<Complex> xt;
  try {
    xt = transition(x, y.chart);
  } catch (const NotInChart&) {
    return INFINITY;
  }
  const auto u = coords(xt), v = coords(y);
  double d = 0.0, scale = 1.0;
  for (int k = 0; k < 8; ++k) {
    d = std::max(d, std::abs(u[k] - v[k]));
    scale = std::max(scale, std::abs(v[k]));
  }
  return d / scale;
}

// All 92 points, pairs expanded.
std::vector<ChartPoint<Complex>> expand(const SolutionSet& set) {
  std::vector<ChartPoint<Complex>> out;
  for (const auto& s : set.solutions) {
    out.push_back(s.point);
    if (s.reality == Reality::Pair) out.push_back(conjugate(s.point));
  }
  return out;
}

double residual(const Lines8<Complex>& unit, const ChartPoint<Complex>& pt) {
  SectionSystem<Complex> sys(pt.chart, unit);
  double r = 0.0;
  for (const auto& v : sys.eval(pt)) r = std::max(r, std::abs(v));
  return r;
}

// Every point of `a` matches exactly one point of `b`.
bool same_set(const std::vector<ChartPoint<Complex>>& a, const std::vector<ChartPoint<Complex>>& b, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& x : a) {
    int hit = -1;
    for (std::size_t k = 0; k < b.size(); ++k)
      if (!used[k] && distance(x, b[k]) < tol) {
        hit = static_cast<int>(k);
        break;
      }
    if (hit < 0) return false;
    used[hit] = true;
  }
  return true;
}

struct Fixture {
  Instance inst = gen_random_instance(42, 10);
  SolutionSet set = solve_all(inst.lines);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("start system has 448 distinct regular solutions") {
  const auto inst = gen_random_instance(42, 10);
  HomotopySystem hom(Chart(0, 0), to_complex(inst.lines, true), 42);
  const auto starts = hom.start_solutions();
  REQUIRE(starts.size() == 448);
  double worst = 0.0, closest = INFINITY;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    worst = std::max(worst, hom.start_residual(starts[k]));
    VecX h;
    MatX hx;
    hom.eval(starts[k], 1.0, &h, &hx, nullptr);
    // At t = 1 only the scaled start system is left, so H vanishes too.
    CHECK(h.norm() < 1e-11);
    CHECK(std::abs(hx.determinant()) > 1e-12);
    for (std::size_t m = k + 1; m < starts.size(); ++m) closest = std::min(closest, (starts[k] - starts[m]).norm());
  }
  CHECK(worst < 1e-12);
  CHECK(closest > 1e-6);

  TrackOptions none;
  none.t_final = 1.0;
  const auto p = track(hom, starts[0], none);
  CHECK((p.endpoint - starts[0]).norm() < 1e-12);
}

TEST_CASE("the homotopy derivatives match finite differences") {
  const auto inst = gen_random_instance(3, 10);
  HomotopySystem hom(Chart(1, 2), to_complex(inst.lines, true), 5);
  VecX x = hom.start_solutions()[17];
  x += VecX::Constant(x.size(), Complex(0.01, -0.02));
  const double t = 0.4, h = 1e-6;
  VecX f, ft;
  MatX fx;
  hom.eval(x, t, &f, &fx, &ft);
  VecX fp, fm;
  hom.eval(x, t + h, &fp, nullptr, nullptr);
  hom.eval(x, t - h, &fm, nullptr, nullptr);
  CHECK(((fp - fm) / (2 * h) - ft).norm() < 1e-6 * (1 + ft.norm()));
  for (int k = 0; k < x.size(); ++k) {
    VecX xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    hom.eval(xp, t, &fp, nullptr, nullptr);
    hom.eval(xm, t, &fm, nullptr, nullptr);
    CHECK(((fp - fm) / (2 * h) - fx.col(k)).norm() < 1e-6 * (1 + fx.col(k).norm()));
  }
}

TEST_CASE("all 92 conics of the seed-42 instance") {
  const auto& f = fixture();
  const auto& set = f.set;
  CHECK(set.paths == 448);
  CHECK(set.total() == 92);
  CHECK(set.converged + set.diverged + set.failed == 448);
  CHECK(set.real_count() % 2 == 0);
  CHECK(set.positive() + set.negative() == set.real_count());
  CHECK(set.positive() == set.negative());

  const auto unit = to_complex(f.inst.lines, true);
  const auto raw = to_complex(f.inst.lines, false);
  const auto all = expand(set);
  REQUIRE(all.size() == 92);
  for (const auto& pt : all) {
    CHECK(residual(unit, pt) < 1e-12);
    CHECK(std::abs(SectionSystem<Complex>(pt.chart, raw).jacobian(pt).determinant) > 1e-8);
  }
  for (std::size_t k = 0; k < all.size(); ++k)
    for (std::size_t m = k + 1; m < all.size(); ++m) CHECK(distance(all[k], all[m]) > 1e-6);

  for (const auto& s : set.solutions) {
    if (s.reality == Reality::Real) {
      for (const auto& x : coords(s.point)) CHECK(x.imag() == 0.0);
      CHECK(s.sign == (s.oriented.real() > 0 ? 1 : -1));
    } else {
      // The conjugate is a zero of the same system and a different point.
      CHECK(distance(conjugate(s.point), s.point) > 1e-6);
      CHECK(s.sign == 0);
    }
  }
  CHECK(assemble_enriched_count(set) == GwForm::hyperbolic(FieldTag::real(), 46));
}

TEST_CASE("solving is deterministic") {
  const auto& f = fixture();
  const auto again = solve_all(f.inst.lines);
  REQUIRE(again.solutions.size() == f.set.solutions.size());
  for (std::size_t k = 0; k < again.solutions.size(); ++k) {
    CHECK(again.solutions[k].point.chart == f.set.solutions[k].point.chart);
    CHECK(coords(again.solutions[k].point) == coords(f.set.solutions[k].point));
  }
}

TEST_CASE("a different gamma finds the same conics") {
  const auto& f = fixture();
  SolverOptions opts;
  opts.seed = 7;
  const auto other = solve_all(f.inst.lines, opts);
  CHECK(same_set(expand(other), expand(f.set), 1e-8));
  CHECK(other.positive() == f.set.positive());
  CHECK(other.negative() == f.set.negative());
}

TEST_CASE("a different chart finds the same conics with the same signs") {
  const auto& f = fixture();
  SolverOptions opts;
  opts.chart = Chart(2, 4);
  const auto other = solve_all(f.inst.lines, opts);
  CHECK(same_set(expand(other), expand(f.set), 1e-8));
  CHECK(other.positive() == f.set.positive());
  CHECK(other.negative() == f.set.negative());
  // Signs are attached to the same conics.
  for (const auto& s : other.solutions) {
    if (s.reality != Reality::Real) continue;
    for (const auto& t : f.set.solutions)
      if (t.reality == Reality::Real && distance(s.point, t.point) < 1e-8) CHECK(s.sign == t.sign);
  }
}

TEST_CASE("the total-degree homotopy agrees") {
  const auto& f = fixture();
  SolverOptions opts;
  opts.total_degree = true;
  const auto td = solve_all(f.inst.lines, opts);
  CHECK(td.paths == 6561);
  CHECK(same_set(expand(td), expand(f.set), 1e-8));
  CHECK(td.positive() == f.set.positive());
}

TEST_CASE("the planted conic is recovered") {
  const auto inst = gen_planted_instance(7);
  const auto set = solve_all(inst.lines);
  CHECK(set.total() == 92);
  ChartPoint<Complex> planted{Chart(0, 0), {}, {}};
  for (int k = 0; k < 3; ++k) planted.a[k] = inst.planted->a[k].get_d();
  for (int k = 0; k < 5; ++k) planted.b[k] = inst.planted->b[k].get_d();
  int hits = 0;
  for (const auto& s : set.solutions)
    if (distance(s.point, planted) < 1e-8) {
      ++hits;
      CHECK(s.reality == Reality::Real);
      const Rational det = SectionSystem<Rational>(Chart(0, 0), inst.lines).jacobian(*inst.planted).oriented;
      const Complex num = SectionSystem<Complex>(Chart(0, 0), to_complex(inst.lines)).jacobian(planted).oriented;
      CHECK(std::abs(num - det.get_d()) < 1e-8 * std::abs(det.get_d()));
      // The exact sign is what the solver reports, whichever chart it used.
      CHECK(s.sign == sgn(det));
    }
  CHECK(hits == 1);
}

TEST_CASE("Newton refinement") {
  const auto& f = fixture();
  const auto unit = to_complex(f.inst.lines, true);
  const auto unit_real = to_double(f.inst.lines, true);
  bool tried_real = false;
  for (const auto& s : f.set.solutions) {
    SectionSystem<Complex> sys(s.point.chart, unit);
    ChartPoint<Complex> nudged = s.point;
    for (auto& x : nudged.a) x *= 1.0 + 1e-5;
    for (auto& x : nudged.b) x += Complex(1e-6, -1e-6);
    const auto r = refine(sys, nudged);
    CHECK(r.converged);
    CHECK(r.residual < 1e-12);
    CHECK(distance(r.point, s.point) < 1e-9);
    if (s.reality == Reality::Real && !tried_real) {
      tried_real = true;
      ChartPoint<double> rp{s.point.chart, {}, {}};
      for (int k = 0; k < 3; ++k) rp.a[k] = s.point.a[k].real() * (1 + 1e-6);
      for (int k = 0; k < 5; ++k) rp.b[k] = s.point.b[k].real() - 1e-6;
      const auto rr = refine_real(SectionSystem<double>(rp.chart, unit_real), rp);
      CHECK(rr.converged);
      CHECK(rr.residual < 1e-12);
      for (int k = 0; k < 3; ++k) CHECK(std::abs(rr.point.a[k] - s.point.a[k].real()) < 1e-9 * (1 + std::abs(rr.point.a[k])));
    }
  }
  CHECK(tried_real);
}

TEST_CASE("incomplete sets are refused") {
  SolutionSet partial = fixture().set;
  partial.solutions.pop_back();
  CHECK_THROWS_AS(assemble_enriched_count(partial), IncompleteSet);
}

TEST_CASE("too few retries and steps surface as a count mismatch") {
  const auto& f = fixture();
  SolverOptions opts;
  opts.max_steps = 5;
  opts.max_retries = 0;
  try {
    solve_all(f.inst.lines, opts);
    FAIL("expected CountMismatch");
  } catch (const CountMismatch& e) {
    CHECK(e.partial().total() < 92);
    CHECK(e.partial().paths == 448);
  }
}

}  // TEST_SUITE
