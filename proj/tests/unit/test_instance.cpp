#include <doctest.h>

#include <cmath>

#include "conics/instance.hpp"

using namespace conics;

namespace {

// Plücker-style skewness: the four spanning points are independent.
bool skew_by_rank(const Line3<Rational>& l, const Line3<Rational>& m) {
  Matrix<Rational> mat(4, 4, Rational(0));
  for (int c = 0; c < 4; ++c) {
    mat(0, c) = l.p()[c];
    mat(1, c) = l.s()[c];
    mat(2, c) = m.p()[c];
    mat(3, c) = m.s()[c];
  }
  return determinant(mat) != 0;
}

}  // namespace

TEST_SUITE("instance") {

TEST_CASE("random instances are deterministic and pairwise skew") {
  const auto a = gen_random_instance(42, 10);
  const auto b = gen_random_instance(42, 10);
  CHECK(a.kind == "random");
  CHECK(a.seed == 42u);
  CHECK_FALSE(a.planted);
  for (int n = 0; n < 8; ++n) {
    CHECK(a.lines[n].p() == b.lines[n].p());
    CHECK(a.lines[n].s() == b.lines[n].s());
    for (const auto& x : a.lines[n].p()) {
      CHECK(abs(x) <= 10);
      CHECK(x.get_den() == 1);
    }
  }
  for (int n = 0; n < 8; ++n)
    for (int m = n + 1; m < 8; ++m) CHECK(skew_by_rank(a.lines[n], a.lines[m]));
  CHECK(genericity_check(a.lines).passed());

  const auto c = gen_random_instance(43, 10);
  bool differs = false;
  for (int n = 0; n < 8; ++n) differs = differs || c.lines[n].p() != a.lines[n].p();
  CHECK(differs);
}

TEST_CASE("random instance arguments") {
  CHECK_THROWS_AS(gen_random_instance(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(gen_random_instance(1, -4), std::invalid_argument);
  // Bound 1 is a valid argument; with coordinates in {-1,0,1} a generic
  // configuration is rare, so running out of redraws is the expected outcome.
  CHECK_THROWS_AS(gen_random_instance(2, 1, std::nullopt, 200), ExhaustedRetries);
  const auto small = gen_random_instance(2, 2);
  for (const auto& l : small.lines)
    for (const auto& x : l.s()) CHECK(abs(x) <= 2);
  // Over F_3 no configuration of 8 lines is generic enough.
  CHECK_THROWS_AS(gen_random_instance(1, 10, 3, 50), ExhaustedRetries);
  const auto mod7 = gen_random_instance(4, 10, 7);
  CHECK(genericity_check(reduce_lines(mod7.lines, 7)).passed());
}

TEST_CASE("planted instances have an exact nonsingular zero") {
  for (std::uint64_t seed : {1, 2, 3, 5, 7, 8, 11}) {
    const auto inst = gen_planted_instance(seed);
    REQUIRE(inst.planted);
    CHECK(inst.kind == "planted");
    CHECK(inst.planted->chart == Chart(0, 0));
    for (const auto& x : inst.planted->a) CHECK(x != 0);
    for (const auto& x : inst.planted->b) CHECK(x != 0);
    SectionSystem<Rational> sys(Chart(0, 0), inst.lines);
    for (const auto& v : sys.eval(*inst.planted)) CHECK(v == 0);
    CHECK(sys.jacobian(*inst.planted).determinant != 0);
    CHECK(genericity_check(inst.lines).passed());

    // Every line meets the planted plane in a point of the planted conic.
    const auto e = chart_embed(*inst.planted);
    for (const auto& l : inst.lines) {
      const auto x = meet_plane_oracle(l, e.plane);
      CHECK(dot(e.plane.a, x) == 0);
      CHECK(eval_conic(e.coeffs, plane_coords(0, x)) == 0);
    }
  }
  const auto again = gen_planted_instance(7);
  CHECK(again.planted->b == gen_planted_instance(7).planted->b);
}

TEST_CASE("reduction modulo good and bad primes") {
  const auto inst = gen_planted_instance(5);
  const std::uint64_t p = first_good_prime(inst);
  CHECK(p == 5);
  const auto red = reduce_planted(inst, p);
  SectionSystem<Fp> sys(red.planted.chart, red.lines);
  for (const auto& v : sys.eval(red.planted)) CHECK(is_zero(v));
  CHECK_FALSE(is_zero(sys.jacobian(red.planted).determinant));
  CHECK_THROWS_AS(reduce_planted(inst, 3), BadPrime);
  CHECK(first_good_prime(inst, 7) >= 7);

  // Point reduction agrees coefficient-wise.
  PrimeField f(p);
  for (int k = 0; k < 5; ++k) CHECK(red.planted.b[k] == f.reduce(inst.planted->b[k]));

  const auto random = gen_random_instance(42, 10);
  CHECK_THROWS_AS(reduce_planted(random, 5), std::invalid_argument);

  // A line that collapses mod p.
  auto lines = random.lines;
  lines[0] = Line3<Rational>({Rational(1), Rational(0), Rational(0), Rational(0)},
                             {Rational(8), Rational(7), Rational(0), Rational(0)});
  CHECK_THROWS_AS(reduce_lines(lines, 7), BadPrime);
  lines[0] = Line3<Rational>({Rational(1, 7), Rational(0), Rational(0), Rational(0)},
                             {Rational(0), Rational(1), Rational(0), Rational(0)});
  CHECK_THROWS_AS(reduce_lines(lines, 7), ZeroElement);
}

TEST_CASE("floating point conversion") {
  const auto inst = gen_random_instance(42, 10);
  const auto raw = to_double(inst.lines);
  const auto unit = to_double(inst.lines, true);
  const auto cplx = to_complex(inst.lines, true);
  for (int n = 0; n < 8; ++n) {
    double norm = 0.0;
    for (int k = 0; k < 4; ++k) {
      CHECK(raw[n].p()[k] == inst.lines[n].p()[k].get_d());
      norm += unit[n].s()[k] * unit[n].s()[k];
      CHECK(cplx[n].s()[k].real() == unit[n].s()[k]);
      CHECK(cplx[n].s()[k].imag() == 0.0);
    }
    CHECK(std::abs(norm - 1.0) < 1e-14);
  }
}

}  // TEST_SUITE
