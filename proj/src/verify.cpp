#include "conics/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace conics {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

double coord_distance(const ChartPoint<Complex>& x, const ChartPoint<Complex>& y) {
  double d = 0.0;
  for (int k = 0; k < 3; ++k) d = std::max(d, std::abs(x.a[k] - y.a[k]));
  for (int k = 0; k < 5; ++k) d = std::max(d, std::abs(x.b[k] - y.b[k]));
  return d;
}

ChartPoint<Complex> to_complex(const ChartPoint<Rational>& pt) {
  ChartPoint<Complex> out;
  out.chart = pt.chart;
  for (int k = 0; k < 3; ++k) out.a[k] = pt.a[k].get_d();
  for (int k = 0; k < 5; ++k) out.b[k] = pt.b[k].get_d();
  return out;
}

std::vector<const ConicSolution*> sample(const SolutionSet& set, int per_kind) {
  std::vector<const ConicSolution*> out;
  int real = 0, pair = 0;
  for (const auto& s : set.solutions) {
    int& seen = s.reality == Reality::Real ? real : pair;
    if (seen < per_kind) {
      out.push_back(&s);
      ++seen;
    }
  }
  return out;
}

// Another chart containing pt, preferring the most interior one that differs from pt's.
std::optional<ChartPoint<Complex>> other_chart(const ChartPoint<Complex>& pt) {
  std::optional<ChartPoint<Complex>> best;
  double best_margin = 0.0;
  for (const Chart& c : all_charts()) {
    if (c == pt.chart) continue;
    try {
      auto q = transition(pt, c);
      double big = 1.0;
      for (const auto& x : q.a) big = std::max(big, std::abs(x));
      for (const auto& x : q.b) big = std::max(big, std::abs(x));
      if (1.0 / big > best_margin) {
        best_margin = 1.0 / big;
        best = q;
      }
    } catch (const NotInChart&) {
    }
  }
  return best;
}

void section_checks(const Lines8<Rational>& lines, const SolutionSet& set, int per_kind, std::vector<Check>& checks) {
  const Lines8<Complex> raw = to_complex(lines, false);
  const auto picked = sample(set, per_kind);

  double worst_laplace = 0.0;
  bool tangent_ok = true;
  bool compat_ok = true;
  int compat_tested = 0;
  for (const ConicSolution* s : picked) {
    SectionSystem<Complex> sys(s->point.chart, raw);
    const Complex det = sys.jacobian(s->point).determinant;
    const Complex lap = jacobian_via_laplace(sys, s->point);
    worst_laplace = std::max(worst_laplace, std::abs(lap - det) / std::abs(det));
    for (int n = 0; n < 8; ++n)
      for (int l = 0; l < 3; ++l) tangent_ok = tangent_ok && tangent_diagnostics(sys, s->point, n, l).consistent;
    if (s->reality == Reality::Real) {
      if (auto other = other_chart(s->point)) {
        SectionSystem<Complex> sys2(other->chart, raw);
        const Complex ratio = sys2.jacobian(*other).oriented / sys.jacobian(s->point).oriented;
        compat_ok = compat_ok && ratio.real() > 0 && std::abs(ratio.imag()) <= 1e-6 * std::abs(ratio);
        ++compat_tested;
      }
    }
  }
  checks.push_back({"laplace", worst_laplace < 1e-6,
                    "max relative gap " + fmt(worst_laplace) + " over " + std::to_string(picked.size()) + " solutions"});
  checks.push_back({"tangent", tangent_ok, "identity d(Phi)/da = grad q . (p + dp/da) - 2q(p) at sampled solutions"});
  checks.push_back({"chart-compatibility", compat_ok && compat_tested > 0,
                    std::to_string(compat_tested) + " real solutions, oriented ratio positive"});

  // Rescaling representatives multiplies det by a square: signs of real solutions survive.
  Lines8<Rational> scaled = lines;
  Point3<Rational> p = lines[0].p(), s3 = lines[3].s();
  for (auto& x : p) x *= Rational(-3);
  for (auto& x : s3) x *= Rational(2, 5);
  scaled[0] = Line3<Rational>(p, lines[0].s());
  scaled[3] = Line3<Rational>(lines[3].p(), s3);
  const Lines8<Complex> scaled_c = to_complex(scaled, false);
  bool scaling_ok = true;
  for (const ConicSolution* s : picked) {
    if (s->reality != Reality::Real) continue;
    SectionSystem<Complex> sys(s->point.chart, scaled_c);
    scaling_ok = scaling_ok && (sys.jacobian(s->point).oriented.real() > 0) == (s->sign > 0);
  }
  checks.push_back({"scaling", scaling_ok, "p_0 *= -3, s_3 *= 2/5 keeps every sampled sign"});
}

void planted_checks(const Instance& inst, const SolutionSet& set, std::vector<Check>& checks) {
  const ChartPoint<Rational>& planted = *inst.planted;
  const ChartPoint<Complex> target = to_complex(planted);
  double best = std::numeric_limits<double>::infinity();
  const ConicSolution* hit = nullptr;
  for (const auto& s : set.solutions) {
    for (const auto& cand : {s.point, conjugate(s.point)}) {
      try {
        const double d = coord_distance(transition(cand, planted.chart), target);
        if (d < best) {
          best = d;
          hit = &s;
        }
      } catch (const NotInChart&) {
      }
    }
  }
  checks.push_back({"planted-recovered", best < 1e-8, "distance " + fmt(best)});

  SectionSystem<Rational> exact(planted.chart, inst.lines);
  const Rational det = exact.jacobian(planted).determinant;
  checks.push_back({"planted-exact-det", det != 0, "det = " + fmt(det.get_d())});
  if (hit && det != 0) {
    SectionSystem<Complex> sys(planted.chart, to_complex(inst.lines, false));
    const Complex fdet = sys.jacobian(transition(hit->point, planted.chart)).determinant;
    const double rel = std::abs(fdet - Complex(det.get_d(), 0.0)) / std::abs(det.get_d());
    checks.push_back({"planted-float-det", rel < 1e-8, "relative error " + fmt(rel)});
  }
}

}  // namespace

bool VerificationReport::passed() const {
  return verdict == Verdict::Equal && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

Lines8<Rational> swap_lines(const Lines8<Rational>& lines, int a, int b) {
  Lines8<Rational> out = lines;
  std::swap(out[a], out[b]);
  return out;
}

VerificationReport verify(const Instance& inst, const VerifyOptions& opts) {
  VerificationReport rep;
  SolutionSet set;
  try {
    set = solve_all(inst.lines, opts.solver);
  } catch (const CountMismatch& e) {
    set = e.partial();
    rep.checks.push_back({"count", false, e.what()});
  }
  rep.count = set.total();
  rep.real = set.real_count();
  rep.positive = set.positive();
  rep.negative = set.negative();
  if (rep.count == 92) {
    rep.checks.push_back({"count", true, "92 solutions"});
    rep.gw = assemble_enriched_count(set);
    rep.verdict = gw_equal(rep.gw, GwForm::hyperbolic(FieldTag::real(), 46));
  }
  rep.checks.push_back({"gw", rep.verdict == Verdict::Equal,
                        rep.count == 92 ? rep.gw.str() + " vs 46*H: " + to_string(rep.verdict)
                                        : std::string("not assembled from an incomplete solution set")});

  if (!opts.solver.total_degree)
    rep.checks.push_back({"paths", set.paths == 448, std::to_string(set.paths) + " start paths"});
  double worst_res = 0.0, min_det = std::numeric_limits<double>::infinity();
  for (const auto& s : set.solutions) {
    worst_res = std::max(worst_res, s.residual);
    min_det = std::min(min_det, std::abs(s.jacobian));
  }
  rep.checks.push_back({"residual", worst_res < opts.solver.tol_residual, "max " + fmt(worst_res)});
  rep.checks.push_back({"nonsingular", min_det > 1e-8, "min |det| " + fmt(min_det)});
  rep.checks.push_back({"real-even", rep.real % 2 == 0, std::to_string(rep.real) + " real"});
  rep.checks.push_back({"balance", rep.positive == rep.negative,
                        std::to_string(rep.positive) + " positive, " + std::to_string(rep.negative) + " negative"});

  if (!set.solutions.empty()) section_checks(inst.lines, set, opts.samples, rep.checks);
  if (inst.planted) planted_checks(inst, set, rep.checks);

  if (opts.permutation) {
    try {
      const SolutionSet swapped = solve_all(swap_lines(inst.lines, 0, 1), opts.solver);
      // Equal counts make the swap test vacuous, so every real conic must flip individually.
      std::size_t flipped = 0;
      for (const auto& s : swapped.solutions) {
        if (s.reality != Reality::Real) continue;
        for (const auto& t : set.solutions) {
          if (t.reality != Reality::Real) continue;
          try {
            if (coord_distance(transition(s.point, t.point.chart), t.point) < opts.solver.tol_dedup) {
              flipped += s.sign == -t.sign;
              break;
            }
          } catch (const NotInChart&) {
          }
        }
      }
      const bool ok = swapped.positive() == rep.negative && swapped.negative() == rep.positive && flipped == rep.real;
      rep.checks.push_back({"permutation", ok,
                            "after swapping L0, L1: " + std::to_string(swapped.positive()) + " positive, " +
                                std::to_string(swapped.negative()) + " negative, " + std::to_string(flipped) + " of " +
                                std::to_string(rep.real) + " real conics flipped sign"});
    } catch (const CountMismatch& e) {
      rep.checks.push_back({"permutation", false, e.what()});
    }
  }
  rep.solutions = std::move(set);
  return rep;
}

}  // namespace conics
