#pragma once

// Projective 3-space primitives and the 24 affine charts U_ij of the space
// of plane conics.  A chart point (a1,a2,a3,b1..b5) stands for the plane with
// coefficient vector alpha_i(a) (1 inserted at slot i) and the conic whose
// coefficients, against the monomials
//     z0^2, z1^2, z2^2, z1 z2, z0 z2, z0 z1,
// are beta_j(b) (1 inserted at slot j).  The plane coordinates (z0,z1,z2) of
// chart i are the homogeneous coordinates with y_i dropped.
//
// Projective representatives are never normalized implicitly.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "conics/fields.hpp"
#include "conics/linalg.hpp"

namespace conics {

class LineInPlane : public std::domain_error {
 public:
  LineInPlane() : std::domain_error("line is contained in the plane") {}
};

class NotInChart : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegeneratePoint : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegenerateLine : public std::invalid_argument {
 public:
  DegenerateLine() : std::invalid_argument("line through two proportional points") {}
};

template <class T>
using Vec3 = std::array<T, 3>;
template <class T>
using Point3 = std::array<T, 4>;   // homogeneous coordinates on P^3
template <class T>
using ConicCoeffs = std::array<T, 6>;

/// Monomial k of a plane conic as the index pair (u, v): z_u z_v.
inline constexpr std::array<std::array<int, 2>, 6> kMonomials{{{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};

inline int monomial_index(int u, int v) {
  if (u > v) std::swap(u, v);
  for (int k = 0; k < 6; ++k)
    if (kMonomials[k][0] == u && kMonomials[k][1] == v) return k;
  return -1;
}

template <class T>
T monomial(const Vec3<T>& z, int k) {
  return z[kMonomials[k][0]] * z[kMonomials[k][1]];
}

template <class T>
T eval_conic(const ConicCoeffs<T>& q, const Vec3<T>& z) {
  T s = q[0] * monomial(z, 0);
  for (int k = 1; k < 6; ++k) s += q[k] * monomial(z, k);
  return s;
}

/// Gradient of the quadratic form q at z.
template <class T>
Vec3<T> conic_gradient(const ConicCoeffs<T>& q, const Vec3<T>& z) {
  const T two = from_int(z[0], 2);
  return {two * q[0] * z[0] + q[4] * z[2] + q[5] * z[1],
          two * q[1] * z[1] + q[3] * z[2] + q[5] * z[0],
          two * q[2] * z[2] + q[3] * z[1] + q[4] * z[0]};
}

/// True when u and v are proportional (all 2x2 minors vanish).
template <class T, std::size_t N>
bool proportional(const std::array<T, N>& u, const std::array<T, N>& v) {
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = a + 1; b < N; ++b)
      if (!is_zero(T(u[a] * v[b] - u[b] * v[a]))) return false;
  return true;
}

template <class T, std::size_t N>
bool all_zero(const std::array<T, N>& u) {
  for (const auto& x : u)
    if (!is_zero(x)) return false;
  return true;
}

template <class T>
T dot(const Point3<T>& a, const Point3<T>& x) {
  return a[0] * x[0] + a[1] * x[1] + a[2] * x[2] + a[3] * x[3];
}

template <class T>
class Line3 {
 public:
  Line3(Point3<T> p, Point3<T> s) : p_(std::move(p)), s_(std::move(s)) {
    if (proportional(p_, s_)) throw DegenerateLine();
  }
  const Point3<T>& p() const { return p_; }
  const Point3<T>& s() const { return s_; }

 private:
  Point3<T> p_, s_;
};

template <class T>
struct Plane3 {
  Point3<T> a;
};

struct Chart {
  int i = 0;  // plane chart, 0..3
  int j = 0;  // conic chart, 0..5

  Chart() = default;
  Chart(int i_, int j_) : i(i_), j(j_) {
    if (i < 0 || i > 3 || j < 0 || j > 5) throw std::out_of_range("chart index out of range");
  }
  std::string str() const { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }
  friend bool operator==(const Chart&, const Chart&) = default;
};

std::vector<Chart> all_charts();

template <class T>
struct ChartPoint {
  Chart chart;
  Vec3<T> a;
  std::array<T, 5> b;
};

/// Intersection of a line with a plane:
///   x_j = sum_l a_l (p_l s_j - p_j s_l) = (a.p) s_j - (a.s) p_j.
template <class T>
Point3<T> meet_plane(const Line3<T>& line, const Plane3<T>& plane) {
  const auto& p = line.p();
  const auto& s = line.s();
  Point3<T> x;
  for (int j = 0; j < 4; ++j) {
    T acc = plane.a[0] * (p[0] * s[j] - p[j] * s[0]);
    for (int l = 1; l < 4; ++l) acc += plane.a[l] * (p[l] * s[j] - p[j] * s[l]);
    x[j] = acc;
  }
  if (all_zero(x)) throw LineInPlane();
  return x;
}

/// Independent route to meet_plane: two linear equations cutting out the line
/// (kernel of the 2x4 matrix [p; s]) together with the plane equation; the
/// 1-dimensional kernel of that 3x4 system is the intersection point.
template <class T>
Point3<T> meet_plane_oracle(const Line3<T>& line, const Plane3<T>& plane) {
  const T zero = zero_like(line.p()[0]);
  Matrix<T> ps(2, 4, zero);
  for (int c = 0; c < 4; ++c) {
    ps(0, c) = line.p()[c];
    ps(1, c) = line.s()[c];
  }
  auto eqs = kernel(ps);  // two covectors vanishing on the line
  Matrix<T> sys(3, 4, zero);
  for (int c = 0; c < 4; ++c) {
    sys(0, c) = eqs.at(0)[c];
    sys(1, c) = eqs.at(1)[c];
    sys(2, c) = plane.a[c];
  }
  auto pt = kernel(sys);
  if (pt.size() != 1) throw LineInPlane();
  return {pt[0][0], pt[0][1], pt[0][2], pt[0][3]};
}

/// Drops the i-th homogeneous coordinate.
template <class T>
Vec3<T> plane_coords(int i, const Point3<T>& x) {
  Vec3<T> z;
  for (int k = 0, m = 0; k < 4; ++k)
    if (k != i) z[m++] = x[k];
  return z;
}

/// Inverse of plane_coords on the plane H (needs a_i != 0):
/// y_i = -(sum_{k != i} a_k y_k) / a_i.
template <class T>
Point3<T> lift_plane_coords(int i, const Plane3<T>& h, const Vec3<T>& z) {
  if (is_zero(h.a[i])) throw NotInChart("plane coefficient a_" + std::to_string(i) + " is zero");
  Point3<T> y;
  T acc = zero_like(z[0]);
  for (int k = 0, m = 0; k < 4; ++k) {
    if (k == i) continue;
    y[k] = z[m];
    acc += h.a[k] * z[m];
    ++m;
  }
  y[i] = -acc / h.a[i];
  return y;
}

template <class T>
Point3<T> insert_one(int slot, const Vec3<T>& a) {
  Point3<T> out;
  for (int k = 0, m = 0; k < 4; ++k) out[k] = (k == slot) ? one_like(a[0]) : a[m++];
  return out;
}

template <class T>
ConicCoeffs<T> insert_one(int slot, const std::array<T, 5>& b) {
  ConicCoeffs<T> out;
  for (int k = 0, m = 0; k < 6; ++k) out[k] = (k == slot) ? one_like(b[0]) : b[m++];
  return out;
}

template <class T>
struct EmbeddedConic {
  Plane3<T> plane;
  ConicCoeffs<T> coeffs;  // against the plane coordinates of the chart's i
};

template <class T>
EmbeddedConic<T> chart_embed(const ChartPoint<T>& pt) {
  return {Plane3<T>{insert_one(pt.chart.i, pt.a)}, insert_one(pt.chart.j, pt.b)};
}

/// Inverse of chart_embed.  `q` must be expressed in chart i's plane coordinates.
template <class T>
ChartPoint<T> chart_coords(const Plane3<T>& h, const ConicCoeffs<T>& q, const Chart& chart) {
  if (is_zero(h.a[chart.i])) throw NotInChart("plane not in U_" + std::to_string(chart.i));
  if (is_zero(q[chart.j])) throw NotInChart("conic coefficient " + std::to_string(chart.j) + " is zero");
  ChartPoint<T> pt;
  pt.chart = chart;
  for (int k = 0, m = 0; k < 4; ++k)
    if (k != chart.i) pt.a[m++] = h.a[k] / h.a[chart.i];
  for (int k = 0, m = 0; k < 6; ++k)
    if (k != chart.j) pt.b[m++] = q[k] / q[chart.j];
  return pt;
}

/// Rewrites a conic given in chart `from`'s plane coordinates into chart
/// `to`'s plane coordinates on the same plane (both coefficients of h nonzero).
template <class T>
ConicCoeffs<T> change_plane_chart(const Plane3<T>& h, const ConicCoeffs<T>& q, int from, int to) {
  if (from == to) return q;
  const T zero = zero_like(q[0]);
  const T one = one_like(q[0]);
  // Column c of m: old coordinates of the lift of the c-th new basis vector.
  std::array<Vec3<T>, 3> cols;
  for (int c = 0; c < 3; ++c) {
    Vec3<T> e{zero, zero, zero};
    e[c] = one;
    cols[c] = plane_coords(from, lift_plane_coords(to, h, e));
  }
  ConicCoeffs<T> out{zero, zero, zero, zero, zero, zero};
  for (int k = 0; k < 6; ++k) {
    if (is_zero(q[k])) continue;
    const int u = kMonomials[k][0], v = kMonomials[k][1];
    // (sum_r M_ur z_r)(sum_s M_vs z_s)
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) out[monomial_index(r, s)] += q[k] * cols[r][u] * cols[s][v];
  }
  return out;
}

/// The same plane conic expressed in another chart.  Throws NotInChart when
/// it does not lie in U_target.
template <class T>
ChartPoint<T> transition(const ChartPoint<T>& pt, const Chart& target) {
  auto e = chart_embed(pt);
  if (is_zero(e.plane.a[target.i])) throw NotInChart("plane not in U_" + std::to_string(target.i));
  return chart_coords(e.plane, change_plane_chart(e.plane, e.coeffs, pt.chart.i, target.i), target);
}

/// Representative of T_ij meet H_a, derived from the defining equations:
///   j <= 2:  T_ij = V(z_l : l != j)
///   j >= 3:  T_ij = V(z_{j-3}, z_m - z_n)   with {j-3, m, n} = {0,1,2}, m < n.
template <class T>
Point3<T> trivialization_point(const Chart& chart, const Plane3<T>& h) {
  const int i = chart.i;
  std::array<int, 3> slot;  // homogeneous index of plane coordinate z_m
  for (int k = 0, m = 0; k < 4; ++k)
    if (k != i) slot[m++] = k;
  const T zero = zero_like(h.a[0]);
  Point3<T> y{zero, zero, zero, zero};
  if (chart.j <= 2) {
    const int u = slot[chart.j];
    y[u] = h.a[i];
    y[i] = -h.a[u];
  } else {
    const int drop = chart.j - 3;
    int m = -1, n = -1;
    for (int c = 0; c < 3; ++c) {
      if (c == drop) continue;
      (m < 0 ? m : n) = c;
    }
    y[slot[m]] = h.a[i];
    y[slot[n]] = h.a[i];
    y[i] = -(h.a[slot[m]] + h.a[slot[n]]);
  }
  if (all_zero(y)) throw DegeneratePoint("trivialization point vanishes");
  return y;
}

/// The value a_i^2 B_j used to trivialize O(1) on U_ij; dividing q(L_n meet H)
/// by it gives the chart-normalized section.
template <class T>
T trivialization_value(const Chart& chart, const Plane3<T>& h, const ConicCoeffs<T>& q) {
  return h.a[chart.i] * h.a[chart.i] * q[chart.j];
}

struct GenericityReport {
  bool pairwise_skew = true;
  bool distinct_points = true;
  std::vector<std::array<int, 2>> meeting_pairs;   // det[p_m, s_m, p_n, s_n] = 0
  std::vector<std::array<int, 2>> shared_points;   // a representative point repeated
  bool passed() const { return pairwise_skew && distinct_points; }
};

template <class T>
T skew_determinant(const Line3<T>& l, const Line3<T>& m) {
  Matrix<T> d(4, 4, l.p()[0]);
  for (int c = 0; c < 4; ++c) {
    d(0, c) = l.p()[c];
    d(1, c) = l.s()[c];
    d(2, c) = m.p()[c];
    d(3, c) = m.s()[c];
  }
  return determinant(d);
}

template <class T>
GenericityReport genericity_check(const std::array<Line3<T>, 8>& lines) {
  GenericityReport rep;
  for (int m = 0; m < 8; ++m) {
    for (int n = m + 1; n < 8; ++n) {
      if (is_zero(skew_determinant(lines[m], lines[n]))) {
        rep.pairwise_skew = false;
        rep.meeting_pairs.push_back({m, n});
      }
      const std::array<const Point3<T>*, 2> pm{&lines[m].p(), &lines[m].s()};
      const std::array<const Point3<T>*, 2> pn{&lines[n].p(), &lines[n].s()};
      bool shared = false;
      for (auto* x : pm)
        for (auto* y : pn) shared = shared || proportional(*x, *y);
      if (shared) {
        rep.distinct_points = false;
        rep.shared_points.push_back({m, n});
      }
    }
  }
  return rep;
}

}  // namespace conics
