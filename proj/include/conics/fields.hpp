#pragma once

// Scalar domains used throughout the library: exact rationals (GMP), prime
// fields F_p, quadratic extensions F_{p^2}, and double / complex<double> for
// the numerical side.  Every domain provides the same small set of free
// functions (zero_like, one_like, from_int, is_zero, inverse, is_square,
// square_class) so geometric formulas can be written once as templates.

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace conics {

using Rational = mpq_class;
using Complex = std::complex<double>;

class ZeroElement : public std::domain_error {
 public:
  ZeroElement() : std::domain_error("operation undefined for the zero element") {}
};

class UnsupportedField : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FieldMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FieldKind { Real, Rational, Complex, PrimeField, QuadExtension };

struct FieldTag {
  FieldKind kind = FieldKind::Real;
  std::uint64_t p = 0;  // characteristic for finite fields, 0 otherwise

  static FieldTag real() { return {FieldKind::Real, 0}; }
  static FieldTag rational() { return {FieldKind::Rational, 0}; }
  static FieldTag complex() { return {FieldKind::Complex, 0}; }
  static FieldTag prime(std::uint64_t p) { return {FieldKind::PrimeField, p}; }
  static FieldTag quad_ext(std::uint64_t p) { return {FieldKind::QuadExtension, p}; }

  std::string name() const;
  /// Parses "R", "Q", "C", "F5" / "F_5" / "GF(5)".
  static FieldTag parse(const std::string& text);

  friend bool operator==(const FieldTag&, const FieldTag&) = default;
};

bool is_prime(std::uint64_t n);
std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod);
/// Smallest positive quadratic nonresidue modulo the odd prime p.
std::uint64_t least_nonresidue(std::uint64_t p);

// ---------------------------------------------------------------------------
// F_p

class Fp {
 public:
  Fp() = default;
  /// Unchecked: p must already be known to be an odd prime below 2^32.
  Fp(std::uint64_t p, std::int64_t v);

  std::uint64_t modulus() const { return p_; }
  std::uint64_t value() const { return v_; }

  Fp operator-() const { return raw(p_, v_ == 0 ? 0 : p_ - v_); }
  Fp& operator+=(const Fp& o);
  Fp& operator-=(const Fp& o);
  Fp& operator*=(const Fp& o);
  Fp& operator/=(const Fp& o);
  friend Fp operator+(Fp a, const Fp& b) { return a += b; }
  friend Fp operator-(Fp a, const Fp& b) { return a -= b; }
  friend Fp operator*(Fp a, const Fp& b) { return a *= b; }
  friend Fp operator/(Fp a, const Fp& b) { return a /= b; }
  friend bool operator==(const Fp& a, const Fp& b) { return a.p_ == b.p_ && a.v_ == b.v_; }

  Fp pow(std::uint64_t e) const;
  Fp inverse() const;

 private:
  static Fp raw(std::uint64_t p, std::uint64_t v) {
    Fp x;
    x.p_ = p;
    x.v_ = v;
    return x;
  }
  void check_same(const Fp& o) const;

  std::uint64_t p_ = 0;
  std::uint64_t v_ = 0;
};

/// Validated factory for elements of F_p.
class PrimeField {
 public:
  explicit PrimeField(std::uint64_t p);
  std::uint64_t modulus() const { return p_; }
  Fp operator()(std::int64_t v) const { return Fp(p_, v); }
  /// Reduces a rational; throws ZeroElement when p divides the denominator.
  Fp reduce(const Rational& q) const;

 private:
  std::uint64_t p_;
};

// ---------------------------------------------------------------------------
// F_p[t]/(t^2 + e1 t + e0)

class Fp2 {
 public:
  Fp2() = default;
  Fp2(std::uint64_t p, std::uint64_t e0, std::uint64_t e1, std::uint64_t c0, std::uint64_t c1)
      : p_(p), e0_(e0), e1_(e1), c0_(c0 % p), c1_(c1 % p) {}

  std::uint64_t modulus() const { return p_; }
  std::uint64_t c0() const { return c0_; }
  std::uint64_t c1() const { return c1_; }
  std::uint64_t e0() const { return e0_; }
  std::uint64_t e1() const { return e1_; }
  bool in_base_field() const { return c1_ == 0; }

  Fp2 operator-() const;
  Fp2& operator+=(const Fp2& o);
  Fp2& operator-=(const Fp2& o);
  Fp2& operator*=(const Fp2& o);
  Fp2& operator/=(const Fp2& o);
  friend Fp2 operator+(Fp2 a, const Fp2& b) { return a += b; }
  friend Fp2 operator-(Fp2 a, const Fp2& b) { return a -= b; }
  friend Fp2 operator*(Fp2 a, const Fp2& b) { return a *= b; }
  friend Fp2 operator/(Fp2 a, const Fp2& b) { return a /= b; }
  friend bool operator==(const Fp2& a, const Fp2& b) {
    return a.p_ == b.p_ && a.e0_ == b.e0_ && a.e1_ == b.e1_ && a.c0_ == b.c0_ && a.c1_ == b.c1_;
  }

  Fp2 pow(std::uint64_t e) const;
  Fp2 inverse() const;
  Fp2 frobenius() const { return pow(p_); }

 private:
  void check_same(const Fp2& o) const;

  std::uint64_t p_ = 0, e0_ = 0, e1_ = 0;
  std::uint64_t c0_ = 0, c1_ = 0;
};

class QuadExtField {
 public:
  /// t^2 + e1 t + e0 must have no root mod p.
  QuadExtField(std::uint64_t p, std::uint64_t e0, std::uint64_t e1);
  /// F_p[t]/(t^2 - n) with n the least nonresidue.
  static QuadExtField standard(std::uint64_t p);

  std::uint64_t modulus() const { return p_; }
  Fp2 operator()(std::int64_t c0, std::int64_t c1 = 0) const;
  Fp2 embed(const Fp& x) const { return (*this)(static_cast<std::int64_t>(x.value()), 0); }
  Fp2 generator() const { return (*this)(0, 1); }

 private:
  std::uint64_t p_, e0_, e1_;
};

/// x + x^p, which always lands in the base field.
Fp field_trace(const Fp2& x);
Fp base_part(const Fp2& x);  // requires in_base_field()

// ---------------------------------------------------------------------------
// Square classes

/// Canonical representative of k^x/(k^x)^2.
///   R: +1 / -1.   C: 1.   F_p: 1 or the least nonresidue.
///   Q: signed squarefree integer.   F_{p^2}: 1 (square) or -1 (label of the nonsquare class).
struct SquareClass {
  FieldTag field;
  std::int64_t rep = 1;

  std::string str() const { return std::to_string(rep); }
  friend bool operator==(const SquareClass&, const SquareClass&) = default;
};

SquareClass operator*(const SquareClass& a, const SquareClass& b);

/// Signed squarefree part of n != 0.  Requires |n| < 2^63.
std::int64_t squarefree_part(std::int64_t n);

SquareClass square_class(double x);
SquareClass square_class(const Rational& x);
SquareClass square_class(const Fp& x);
SquareClass square_class(const Fp2& x);
SquareClass square_class(const Complex& x);

bool is_square(double x);
bool is_square(const Rational& x);
bool is_square(const Fp& x);
bool is_square(const Fp2& x);
bool is_square(const Complex& x);

/// Class of an integer representative inside a given base field.
SquareClass square_class_of_int(const FieldTag& field, std::int64_t a);

// ---------------------------------------------------------------------------
// Uniform scalar helpers

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational> || std::is_same_v<T, Fp> ||
                                   std::is_same_v<T, Fp2>;

inline double zero_like(double) { return 0.0; }
inline Complex zero_like(const Complex&) { return {0.0, 0.0}; }
inline Rational zero_like(const Rational&) { return Rational(0); }
inline Fp zero_like(const Fp& x) { return Fp(x.modulus(), 0); }
inline Fp2 zero_like(const Fp2& x) { return Fp2(x.modulus(), x.e0(), x.e1(), 0, 0); }

inline double from_int(double, long n) { return static_cast<double>(n); }
inline Complex from_int(const Complex&, long n) { return {static_cast<double>(n), 0.0}; }
inline Rational from_int(const Rational&, long n) { return Rational(n); }
inline Fp from_int(const Fp& x, long n) { return Fp(x.modulus(), n); }
Fp2 from_int(const Fp2& x, long n);

template <class T>
T one_like(const T& x) {
  return from_int(x, 1);
}

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const Complex& x) { return x == Complex(0.0, 0.0); }
inline bool is_zero(const Rational& x) { return sgn(x) == 0; }
inline bool is_zero(const Fp& x) { return x.value() == 0; }
inline bool is_zero(const Fp2& x) { return x.c0() == 0 && x.c1() == 0; }

FieldTag field_of(double);
FieldTag field_of(const Complex&);
FieldTag field_of(const Rational&);
FieldTag field_of(const Fp& x);
FieldTag field_of(const Fp2& x);

/// Magnitude used for pivoting and tolerance decisions in floating point code.
inline double magnitude(double x) { return x < 0 ? -x : x; }
inline double magnitude(const Complex& x) { return std::abs(x); }

std::string to_string(const Rational& q);  // always "num/den"
Rational parse_rational(const std::string& text);
/// Exact binary value of a finite double.
Rational rational_from_double(double x);

}  // namespace conics
