#pragma once

// The localized section Phi_ij : A^8 -> A^8.  Component n is the chart
// conic evaluated at the plane coordinates of L_n meet H_a.  Since H_a depends
// linearly on alpha_i(a), those plane coordinates are affine in a, and each
// line gets a cached offset + slope description of the map a -> z^n.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "conics/geometry.hpp"
#include "conics/gw.hpp"

namespace conics {

class SingularZero : public std::domain_error {
 public:
  SingularZero() : std::domain_error("Jacobian determinant vanishes at this zero") {}
};

class DegenerateConfiguration : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConePoint : public std::domain_error {
 public:
  ConePoint() : std::domain_error("intersection point has plane coordinates (0,0,0)") {}
};

template <class T>
using Lines8 = std::array<Line3<T>, 8>;

template <class T>
struct ZMap {
  Vec3<T> offset;               // z at a = 0
  std::array<Vec3<T>, 3> slope;  // slope[l] = dz/da_{l+1}
};

template <class T>
struct JacobianRecord {
  Chart chart;
  Matrix<T> matrix;  // rows a1,a2,a3,b1..b5; columns lines 0..7
  T determinant;
  /// (-1)^(i+j) * determinant; the sign convention used for local indices.
  T oriented;
};

template <class T>
class SectionSystem {
 public:
  SectionSystem(const Chart& chart, const Lines8<T>& lines) : chart_(chart), lines_(lines) {
    std::array<int, 3> free;  // plane slots carrying a1,a2,a3
    for (int k = 0, m = 0; k < 4; ++k)
      if (k != chart.i) free[m++] = k;
    for (int n = 0; n < 8; ++n) {
      const auto& p = lines[n].p();
      const auto& s = lines[n].s();
      // Column l of K: coefficient of alpha_l in meet_plane.
      auto column = [&](int l) {
        Point3<T> x;
        for (int j = 0; j < 4; ++j) x[j] = p[l] * s[j] - p[j] * s[l];
        return plane_coords(chart.i, x);
      };
      zmaps_[n].offset = column(chart.i);
      for (int m = 0; m < 3; ++m) zmaps_[n].slope[m] = column(free[m]);
    }
  }

  const Chart& chart() const { return chart_; }
  const Lines8<T>& lines() const { return lines_; }
  const ZMap<T>& zmap(int n) const { return zmaps_[n]; }

  Plane3<T> plane(const Vec3<T>& a) const { return Plane3<T>{insert_one(chart_.i, a)}; }

  Vec3<T> z(int n, const Vec3<T>& a) const {
    const auto& zm = zmaps_[n];
    Vec3<T> out = zm.offset;
    for (int c = 0; c < 3; ++c)
      for (int m = 0; m < 3; ++m) out[c] += zm.slope[m][c] * a[m];
    return out;
  }

  std::array<T, 8> eval(const ChartPoint<T>& pt) const {
    check_chart(pt);
    const ConicCoeffs<T> q = insert_one(chart_.j, pt.b);
    std::array<T, 8> out;
    for (int n = 0; n < 8; ++n) out[n] = eval_conic(q, z(n, pt.a));
    return out;
  }

  /// Raw 8x8 Jacobian, rows = variables, columns = lines.
  Matrix<T> jacobian_matrix(const ChartPoint<T>& pt) const {
    check_chart(pt);
    const ConicCoeffs<T> q = insert_one(chart_.j, pt.b);
    Matrix<T> jac(8, 8, zero_like(pt.a[0]));
    for (int n = 0; n < 8; ++n) {
      const Vec3<T> zn = z(n, pt.a);
      const Vec3<T> g = conic_gradient(q, zn);
      for (int m = 0; m < 3; ++m) {
        const auto& dz = zmaps_[n].slope[m];
        jac(m, n) = g[0] * dz[0] + g[1] * dz[1] + g[2] * dz[2];
      }
      for (int k = 0, row = 3; k < 6; ++k)
        if (k != chart_.j) jac(row++, n) = monomial(zn, k);
    }
    return jac;
  }

  JacobianRecord<T> jacobian(const ChartPoint<T>& pt) const {
    JacobianRecord<T> rec{chart_, jacobian_matrix(pt), zero_like(pt.a[0]), zero_like(pt.a[0])};
    rec.determinant = determinant(rec.matrix);
    rec.oriented = orientation_sign() < 0 ? T(-rec.determinant) : rec.determinant;
    return rec;
  }

  int orientation_sign() const { return (chart_.i + chart_.j) % 2 == 0 ? 1 : -1; }

 private:
  void check_chart(const ChartPoint<T>& pt) const {
    if (!(pt.chart == chart_)) throw std::invalid_argument("chart point " + pt.chart.str() + " used with system " + chart_.str());
  }

  Chart chart_;
  Lines8<T> lines_;
  std::array<ZMap<T>, 8> zmaps_;
};

enum class PointKind { Rational, Conjugate };

/// Local index of a simple zero: <det> for a point defined over the base
/// field, the trace form of <det> for a point of a quadratic extension
/// (a conjugate pair over R, or an F_{p^2} point over F_p).
template <class T>
GwForm local_index(const SectionSystem<T>& sys, const ChartPoint<T>& pt, PointKind kind = PointKind::Rational) {
  const T det = sys.jacobian(pt).oriented;
  if (is_zero(det)) throw SingularZero();
  if constexpr (std::is_same_v<T, Complex>) {
    if (kind == PointKind::Conjugate) return trace_form(det);
    return GwForm::unit(square_class(det.real()));
  } else if constexpr (std::is_same_v<T, Fp2>) {
    if (kind == PointKind::Conjugate) return trace_form(det);
    return GwForm::unit(square_class(base_part(det)));
  } else {
    if (kind == PointKind::Conjugate) throw std::invalid_argument("conjugate points need an extension-field backend");
    return GwForm::unit(square_class(det));
  }
}

/// Signed 5x5 minors of the 5x6 monomial matrix of five points: coefficient k
/// is (-1)^k times the minor with column k removed.  Proportional to the
/// conic through the points whenever they impose independent conditions.
template <class T>
ConicCoeffs<T> conic_minors(const std::array<Vec3<T>, 5>& pts) {
  Matrix<T> mono(5, 6, pts[0][0]);
  for (int r = 0; r < 5; ++r)
    for (int k = 0; k < 6; ++k) mono(r, k) = monomial(pts[r], k);
  ConicCoeffs<T> out;
  for (int k = 0; k < 6; ++k) {
    Matrix<T> sub(5, 5, pts[0][0]);
    for (int r = 0; r < 5; ++r)
      for (int c = 0, cc = 0; c < 6; ++c)
        if (c != k) sub(r, cc++) = mono(r, c);
    T d = determinant(sub);
    out[k] = (k % 2 == 0) ? d : T(-d);
  }
  return out;
}

template <class T>
ConicCoeffs<T> conic_through_5(const std::array<Vec3<T>, 5>& pts) {
  ConicCoeffs<T> c = conic_minors(pts);
  bool degenerate;
  if constexpr (is_exact_v<T>) {
    degenerate = all_zero(c);
  } else {
    double scale = 0.0, big = 0.0;
    for (const auto& p : pts)
      for (const auto& x : p) scale = std::max(scale, magnitude(x));
    for (const auto& x : c) big = std::max(big, magnitude(x));
    degenerate = big <= 1e-12 * std::pow(scale, 10);
  }
  if (degenerate) throw DegenerateConfiguration("five points do not impose independent conditions on conics");
  return c;
}

/// det Jac by Laplace expansion along the three a-rows.  The complementary
/// 5x5 b-minor on the lines outside {u,v,w} is, up to (-1)^j, the j-th
/// coefficient of the conic through those five intersection points.
template <class T>
T jacobian_via_laplace(const SectionSystem<T>& sys, const ChartPoint<T>& pt) {
  const Matrix<T> jac = sys.jacobian_matrix(pt);
  const int j = sys.chart().j;
  T total = zero_like(pt.a[0]);
  for (int u = 0; u < 8; ++u)
    for (int v = u + 1; v < 8; ++v)
      for (int w = v + 1; w < 8; ++w) {
        Matrix<T> a3(3, 3, total);
        const int cols[3] = {u, v, w};
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) a3(r, c) = jac(r, cols[c]);
        const T minor_a = determinant(a3);
        if (is_zero(minor_a)) continue;
        std::array<Vec3<T>, 5> rest;
        for (int n = 0, m = 0; n < 8; ++n)
          if (n != u && n != v && n != w) rest[m++] = sys.z(n, pt.a);
        const T f = conic_minors(rest)[j];
        // 1-based rows {1,2,3} and columns {u+1,v+1,w+1}: sign (-1)^(u+v+w+1).
        const bool negative = ((u + v + w + 1 + j) % 2) != 0;
        const T term = minor_a * f;
        if (negative) total -= term;
        else total += term;
      }
  return total;
}

template <class T>
struct TangentDiagnostics {
  Vec3<T> gradient;
  T deviation;        // grad q(p) . (p + dp/da_l)
  T jacobian_entry;   // dPhi^n/da_l
  bool consistent;    // deviation == jacobian_entry + 2 q(p)
};

template <class T>
TangentDiagnostics<T> tangent_diagnostics(const SectionSystem<T>& sys, const ChartPoint<T>& pt, int n, int l) {
  if (n < 0 || n > 7 || l < 0 || l > 2) throw std::out_of_range("tangent_diagnostics index");
  const Vec3<T> p = sys.z(n, pt.a);
  if (all_zero(p)) throw ConePoint();
  const ConicCoeffs<T> q = insert_one(sys.chart().j, pt.b);
  const Vec3<T>& dp = sys.zmap(n).slope[l];
  TangentDiagnostics<T> d{conic_gradient(q, p), zero_like(p[0]), zero_like(p[0]), false};
  d.deviation = d.gradient[0] * (p[0] + dp[0]) + d.gradient[1] * (p[1] + dp[1]) + d.gradient[2] * (p[2] + dp[2]);
  d.jacobian_entry = d.gradient[0] * dp[0] + d.gradient[1] * dp[1] + d.gradient[2] * dp[2];
  const T expected = d.jacobian_entry + from_int(p[0], 2) * eval_conic(q, p);
  if constexpr (is_exact_v<T>) {
    d.consistent = d.deviation == expected;
  } else {
    // Both sides are sums of products; rounding scales with the terms, not the result.
    double terms = 0.0;
    for (int c = 0; c < 3; ++c) terms += magnitude(d.gradient[c]) * (magnitude(p[c]) + magnitude(dp[c]));
    d.consistent = magnitude(d.deviation - expected) <= 1e-9 * (1.0 + terms);
  }
  return d;
}

}  // namespace conics
