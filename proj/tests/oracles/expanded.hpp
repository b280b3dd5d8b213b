#pragma once

// Fully expanded polynomial form of the chart section, built from scratch:
// the plane is alpha_i(a), the intersection of L = span(p, s) with it is
// (A.p) s - (A.s) p, and the conic coefficients are beta_j(b).  Variables
// 0..2 are a1..a3, 3..7 are b1..b5.

#include <array>
#include <vector>

#include "conics/section.hpp"
#include "poly.hpp"

namespace oracle {

inline std::array<Poly, 8> expanded_section(int i, int j, const conics::Lines8<conics::Rational>& lines) {
  std::array<Poly, 4> plane;
  for (int k = 0, m = 0; k < 4; ++k) plane[k] = (k == i) ? Poly(1) : Poly::var(m++);
  std::array<Poly, 6> coeff;
  for (int k = 0, m = 3; k < 6; ++k) coeff[k] = (k == j) ? Poly(1) : Poly::var(m++);

  std::array<Poly, 8> out;
  for (int n = 0; n < 8; ++n) {
    const auto& p = lines[n].p();
    const auto& s = lines[n].s();
    Poly ap, as;
    for (int k = 0; k < 4; ++k) {
      ap += plane[k] * Poly(p[k]);
      as += plane[k] * Poly(s[k]);
    }
    std::vector<Poly> z;
    for (int k = 0; k < 4; ++k)
      if (k != i) z.push_back(ap * Poly(s[k]) - as * Poly(p[k]));
    // z0^2, z1^2, z2^2, z1 z2, z0 z2, z0 z1
    out[n] = coeff[0] * z[0] * z[0] + coeff[1] * z[1] * z[1] + coeff[2] * z[2] * z[2] + coeff[3] * z[1] * z[2] +
             coeff[4] * z[0] * z[2] + coeff[5] * z[0] * z[1];
  }
  return out;
}

inline std::vector<Q> flatten(const conics::ChartPoint<conics::Rational>& pt) {
  std::vector<Q> x(kVars, Q(0));
  for (int k = 0; k < 3; ++k) x[k] = pt.a[k];
  for (int k = 0; k < 5; ++k) x[3 + k] = pt.b[k];
  return x;
}

}  // namespace oracle
