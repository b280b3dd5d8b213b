#include "conics/instance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace conics {

namespace {

using Rng = std::mt19937_64;

Rational draw(Rng& rng, int bound) {
  std::uniform_int_distribution<int> dist(-bound, bound);
  return Rational(dist(rng));
}

Point3<Rational> draw_point(Rng& rng, int bound) {
  return {draw(rng, bound), draw(rng, bound), draw(rng, bound), draw(rng, bound)};
}

std::optional<Lines8<Fp>> try_reduce(const Lines8<Rational>& lines, std::uint64_t p) {
  try {
    return reduce_lines(lines, p);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Coefficients (in t) of the product of two polynomials of degree <= 2.
std::array<Rational, 5> poly_mul(const std::array<Rational, 3>& f, const std::array<Rational, 3>& g) {
  std::array<Rational, 5> out{0, 0, 0, 0, 0};
  for (int u = 0; u < 3; ++u)
    for (int v = 0; v < 3; ++v) out[u + v] += f[u] * g[v];
  return out;
}

Rational poly_eval(const std::array<Rational, 3>& f, const Rational& t) { return f[0] + t * (f[1] + t * f[2]); }

}  // namespace

Instance gen_random_instance(std::uint64_t seed, int bound, std::optional<std::uint64_t> reduce_prime, int max_retries) {
  if (bound < 1) throw std::invalid_argument("coordinate bound must be >= 1");
  Rng rng(seed);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    std::vector<Line3<Rational>> drawn;
    bool ok = true;
    for (int n = 0; n < 8 && ok; ++n) {
      auto p = draw_point(rng, bound);
      auto s = draw_point(rng, bound);
      if (proportional(p, s)) {
        ok = false;
        break;
      }
      drawn.emplace_back(p, s);
    }
    if (!ok) continue;
    Lines8<Rational> lines{drawn[0], drawn[1], drawn[2], drawn[3], drawn[4], drawn[5], drawn[6], drawn[7]};
    if (!genericity_check(lines).passed()) continue;
    if (reduce_prime) {
      auto red = try_reduce(lines, *reduce_prime);
      if (!red || !genericity_check(*red).passed()) continue;
    }
    Instance inst{lines, "random", seed, std::nullopt};
    return inst;
  }
  throw ExhaustedRetries("no generic configuration after " + std::to_string(max_retries) + " redraws (bound " +
                         std::to_string(bound) + ")");
}

Instance gen_planted_instance(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> coef(-3, 3), plane_coef(-5, 5), tdist(-6, 6);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Point3<Rational> a;
    for (auto& x : a) {
      int v = 0;
      while (v == 0) v = plane_coef(rng);
      x = v;
    }
    std::array<std::array<Rational, 3>, 3> f;
    Matrix<Rational> fm(3, 3, Rational(0));
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < 3; ++d) fm(k, d) = f[k][d] = coef(rng);
    if (is_zero(determinant(fm))) continue;  // image would be a line or a point

    // q(f(t)) == 0 identically: five linear conditions on the six coefficients.
    Matrix<Rational> sys(5, 6, Rational(0));
    for (int k = 0; k < 6; ++k) {
      auto prod = poly_mul(f[kMonomials[k][0]], f[kMonomials[k][1]]);
      for (int d = 0; d < 5; ++d) sys(d, k) = prod[d];
    }
    auto ker = kernel(sys);
    if (ker.size() != 1) continue;
    ConicCoeffs<Rational> b;
    for (int k = 0; k < 6; ++k) b[k] = ker[0][k];
    if (std::any_of(b.begin(), b.end(), [](const Rational& x) { return is_zero(x); })) continue;

    std::set<int> ts;
    while (ts.size() < 8) ts.insert(tdist(rng));
    std::vector<Line3<Rational>> drawn;
    bool ok = true;
    for (int t : ts) {
      Vec3<Rational> z{poly_eval(f[0], t), poly_eval(f[1], t), poly_eval(f[2], t)};
      Point3<Rational> y{-(a[1] * z[0] + a[2] * z[1] + a[3] * z[2]), a[0] * z[0], a[0] * z[1], a[0] * z[2]};
      if (all_zero(y)) {
        ok = false;
        break;
      }
      Point3<Rational> s = draw_point(rng, 5);
      if (is_zero(dot(a, s)) || proportional(y, s)) {
        ok = false;
        break;
      }
      drawn.emplace_back(y, s);
    }
    if (!ok) continue;
    Lines8<Rational> lines{drawn[0], drawn[1], drawn[2], drawn[3], drawn[4], drawn[5], drawn[6], drawn[7]};
    if (!genericity_check(lines).passed()) continue;

    Plane3<Rational> h{a};
    ChartPoint<Rational> pt = chart_coords(h, b, Chart(0, 0));
    SectionSystem<Rational> section(Chart(0, 0), lines);
    if (is_zero(section.jacobian(pt).determinant)) continue;
    Instance inst{lines, "planted", seed, pt};
    return inst;
  }
  throw ExhaustedRetries("planted instance generation failed");
}

Lines8<Fp> reduce_lines(const Lines8<Rational>& lines, std::uint64_t p) {
  PrimeField fp(p);
  auto red = [&](const Point3<Rational>& x) {
    return Point3<Fp>{fp.reduce(x[0]), fp.reduce(x[1]), fp.reduce(x[2]), fp.reduce(x[3])};
  };
  std::vector<Line3<Fp>> out;
  for (const auto& l : lines) {
    auto p_ = red(l.p()), s_ = red(l.s());
    if (proportional(p_, s_)) throw BadPrime("a line degenerates mod " + std::to_string(p));
    out.emplace_back(p_, s_);
  }
  return {out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7]};
}

ChartPoint<Fp> reduce_point(const ChartPoint<Rational>& pt, std::uint64_t p) {
  PrimeField fp(p);
  ChartPoint<Fp> out;
  out.chart = pt.chart;
  for (int k = 0; k < 3; ++k) out.a[k] = fp.reduce(pt.a[k]);
  for (int k = 0; k < 5; ++k) out.b[k] = fp.reduce(pt.b[k]);
  return out;
}

ReducedPlanted reduce_planted(const Instance& inst, std::uint64_t p) {
  if (!inst.planted) throw std::invalid_argument("instance has no planted solution");
  auto reduced = [&] {
    try {
      return ReducedPlanted{reduce_lines(inst.lines, p), reduce_point(*inst.planted, p)};
    } catch (const ZeroElement&) {
      throw BadPrime(std::to_string(p) + " divides a denominator");
    }
  };
  const ReducedPlanted r = reduced();
  SectionSystem<Fp> sys(r.planted.chart, r.lines);
  const Plane3<Fp> h = sys.plane(r.planted.a);
  for (const auto& l : r.lines) {
    try {
      meet_plane(l, h);
    } catch (const LineInPlane&) {
      throw BadPrime("a line falls into the planted plane mod " + std::to_string(p));
    }
  }
  auto vals = sys.eval(r.planted);
  if (!std::all_of(vals.begin(), vals.end(), [](const Fp& x) { return is_zero(x); }))
    throw BadPrime("planted point is not a zero mod " + std::to_string(p));
  if (is_zero(sys.jacobian(r.planted).determinant)) throw BadPrime("planted zero is singular mod " + std::to_string(p));
  return r;
}

std::uint64_t first_good_prime(const Instance& inst, std::uint64_t start) {
  for (std::uint64_t p = std::max<std::uint64_t>(start, 3); p < 1000; ++p) {
    if (!is_prime(p)) continue;
    try {
      reduce_planted(inst, p);
      return p;
    } catch (const BadPrime&) {
    } catch (const ZeroElement&) {
    }
  }
  throw BadPrime("no good prime below 1000");
}

namespace {

template <class T>
Point3<T> convert(const Point3<Rational>& x, bool normalize) {
  Point3<T> out;
  double norm = 0.0;
  for (int k = 0; k < 4; ++k) {
    double v = x[k].get_d();
    out[k] = T(v);
    norm += v * v;
  }
  if (normalize) {
    norm = std::sqrt(norm);
    for (auto& v : out) v /= norm;
  }
  return out;
}

template <class T>
Lines8<T> convert_lines(const Lines8<Rational>& lines, bool normalize) {
  std::vector<Line3<T>> out;
  for (const auto& l : lines) out.emplace_back(convert<T>(l.p(), normalize), convert<T>(l.s(), normalize));
  return {out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7]};
}

}  // namespace

Lines8<double> to_double(const Lines8<Rational>& lines, bool normalize) { return convert_lines<double>(lines, normalize); }
Lines8<Complex> to_complex(const Lines8<Rational>& lines, bool normalize) {
  return convert_lines<Complex>(lines, normalize);
}

}  // namespace conics
