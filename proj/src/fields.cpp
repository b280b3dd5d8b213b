#include "conics/fields.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <regex>

namespace conics {

namespace {

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

// Deterministic Miller-Rabin for 64-bit inputs.
bool miller_rabin(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t small : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % small == 0) return n == small;
  }
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

std::int64_t to_int64(const mpz_class& z) {
  if (!z.fits_slong_p()) {
    throw std::range_error("square classes over Q are restricted to |numerator|, denominator < 2^63");
  }
  return z.get_si();
}

}  // namespace

// ---------------------------------------------------------------------------

std::string FieldTag::name() const {
  switch (kind) {
    case FieldKind::Real: return "R";
    case FieldKind::Rational: return "Q";
    case FieldKind::Complex: return "C";
    case FieldKind::PrimeField: return "F" + std::to_string(p);
    case FieldKind::QuadExtension: return "F" + std::to_string(p) + "^2";
  }
  return "?";
}

FieldTag FieldTag::parse(const std::string& text) {
  if (text == "R") return real();
  if (text == "Q") return rational();
  if (text == "C") return complex();
  static const std::regex finite(R"(^(?:F_?|GF\()(\d+)\)?$)");
  std::smatch m;
  if (std::regex_match(text, m, finite)) {
    std::uint64_t p = std::stoull(m[1].str());
    if (p == 2 || !is_prime(p)) throw UnsupportedField("F_p requires an odd prime, got " + text);
    return prime(p);
  }
  throw UnsupportedField("unknown field '" + text + "' (expected R, Q, C or F<p>)");
}

bool is_prime(std::uint64_t n) { return miller_rabin(n); }

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  std::uint64_t result = 1 % mod;
  base %= mod;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, mod);
    base = mul_mod(base, base, mod);
    exp >>= 1;
  }
  return result;
}

std::uint64_t least_nonresidue(std::uint64_t p) {
  for (std::uint64_t n = 2; n < p; ++n) {
    if (pow_mod(n, (p - 1) / 2, p) == p - 1) return n;
  }
  throw UnsupportedField("no quadratic nonresidue modulo " + std::to_string(p));
}

// ---------------------------------------------------------------------------
// Fp

Fp::Fp(std::uint64_t p, std::int64_t v) : p_(p) {
  std::int64_t r = v % static_cast<std::int64_t>(p);
  if (r < 0) r += static_cast<std::int64_t>(p);
  v_ = static_cast<std::uint64_t>(r);
}

void Fp::check_same(const Fp& o) const {
  if (p_ != o.p_) throw FieldMismatch("F_p elements with different moduli");
}

Fp& Fp::operator+=(const Fp& o) {
  check_same(o);
  v_ += o.v_;
  if (v_ >= p_) v_ -= p_;
  return *this;
}

Fp& Fp::operator-=(const Fp& o) {
  check_same(o);
  v_ = v_ >= o.v_ ? v_ - o.v_ : v_ + p_ - o.v_;
  return *this;
}

Fp& Fp::operator*=(const Fp& o) {
  check_same(o);
  v_ = v_ * o.v_ % p_;
  return *this;
}

Fp& Fp::operator/=(const Fp& o) { return *this *= o.inverse(); }

Fp Fp::pow(std::uint64_t e) const { return raw(p_, pow_mod(v_, e, p_)); }

Fp Fp::inverse() const {
  if (v_ == 0) throw ZeroElement();
  return pow(p_ - 2);
}

PrimeField::PrimeField(std::uint64_t p) : p_(p) {
  if (p == 2 || !is_prime(p)) throw UnsupportedField("F_p requires an odd prime, got " + std::to_string(p));
  if (p >= (1ull << 32)) throw UnsupportedField("F_p modulus must be below 2^32");
}

Fp PrimeField::reduce(const Rational& q) const {
  mpz_class pz(static_cast<unsigned long>(p_));
  mpz_class num = q.get_num() % pz;
  mpz_class den = q.get_den() % pz;
  if (den == 0) throw ZeroElement();
  if (num < 0) num += pz;
  return Fp(p_, num.get_si()) / Fp(p_, den.get_si());
}

// ---------------------------------------------------------------------------
// Fp2

void Fp2::check_same(const Fp2& o) const {
  if (p_ != o.p_ || e0_ != o.e0_ || e1_ != o.e1_) throw FieldMismatch("F_{p^2} elements from different extensions");
}

Fp2 Fp2::operator-() const { return Fp2(p_, e0_, e1_, (p_ - c0_) % p_, (p_ - c1_) % p_); }

Fp2& Fp2::operator+=(const Fp2& o) {
  check_same(o);
  c0_ = (c0_ + o.c0_) % p_;
  c1_ = (c1_ + o.c1_) % p_;
  return *this;
}

Fp2& Fp2::operator-=(const Fp2& o) {
  check_same(o);
  c0_ = (c0_ + p_ - o.c0_) % p_;
  c1_ = (c1_ + p_ - o.c1_) % p_;
  return *this;
}

Fp2& Fp2::operator*=(const Fp2& o) {
  check_same(o);
  // t^2 = -e1 t - e0
  std::uint64_t hh = c1_ * o.c1_ % p_;
  std::uint64_t lo = c0_ * o.c0_ % p_;
  std::uint64_t mid = (c0_ * o.c1_ + c1_ * o.c0_) % p_;
  std::uint64_t n0 = (lo + (p_ - hh * e0_ % p_)) % p_;
  std::uint64_t n1 = (mid + (p_ - hh * e1_ % p_)) % p_;
  c0_ = n0;
  c1_ = n1;
  return *this;
}

Fp2& Fp2::operator/=(const Fp2& o) { return *this *= o.inverse(); }

Fp2 Fp2::pow(std::uint64_t e) const {
  Fp2 result(p_, e0_, e1_, 1, 0);
  Fp2 base = *this;
  while (e > 0) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

Fp2 Fp2::inverse() const {
  if (c0_ == 0 && c1_ == 0) throw ZeroElement();
  return pow(p_ * p_ - 2);
}

QuadExtField::QuadExtField(std::uint64_t p, std::uint64_t e0, std::uint64_t e1) : p_(p), e0_(e0 % p), e1_(e1 % p) {
  PrimeField check(p);
  (void)check;
  if (p > 65521) throw UnsupportedField("F_{p^2} arithmetic requires p < 2^16");
  for (std::uint64_t x = 0; x < p; ++x) {
    if ((x * x + e1_ * x + e0_) % p == 0) {
      throw UnsupportedField("defining polynomial of F_{p^2} has a root mod p");
    }
  }
}

QuadExtField QuadExtField::standard(std::uint64_t p) {
  std::uint64_t n = least_nonresidue(p);
  return QuadExtField(p, p - n, 0);
}

Fp2 QuadExtField::operator()(std::int64_t c0, std::int64_t c1) const {
  auto red = [this](std::int64_t v) {
    std::int64_t r = v % static_cast<std::int64_t>(p_);
    return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(p_) : r);
  };
  return Fp2(p_, e0_, e1_, red(c0), red(c1));
}

Fp field_trace(const Fp2& x) { return base_part(x + x.frobenius()); }

Fp base_part(const Fp2& x) {
  if (!x.in_base_field()) throw std::domain_error("element is not in the base field");
  return Fp(x.modulus(), static_cast<std::int64_t>(x.c0()));
}

Fp2 from_int(const Fp2& x, long n) {
  std::int64_t p = static_cast<std::int64_t>(x.modulus());
  std::int64_t r = n % p;
  if (r < 0) r += p;
  return Fp2(x.modulus(), x.e0(), x.e1(), static_cast<std::uint64_t>(r), 0);
}

// ---------------------------------------------------------------------------
// Square classes

std::int64_t squarefree_part(std::int64_t n) {
  if (n == 0) throw ZeroElement();
  if (n == std::numeric_limits<std::int64_t>::min()) throw std::range_error("squarefree_part: out of range");
  std::int64_t sign = n < 0 ? -1 : 1;
  std::uint64_t m = static_cast<std::uint64_t>(n < 0 ? -n : n);
  std::uint64_t result = 1;
  // Trial division to the cube root; what remains has at most two prime factors.
  for (std::uint64_t d = 2; d * d * d <= m; d += (d == 2 ? 1 : 2)) {
    int e = 0;
    while (m % d == 0) {
      m /= d;
      ++e;
    }
    if (e & 1) result *= d;
  }
  if (m > 1) {
    std::uint64_t r = isqrt(m);
    if (r * r != m) {
      // m is prime or a product of two distinct primes; squarefree either way.
      result *= m;
    }
  }
  return sign * static_cast<std::int64_t>(result);
}

SquareClass operator*(const SquareClass& a, const SquareClass& b) {
  if (!(a.field == b.field)) throw FieldMismatch("square classes over different fields");
  SquareClass out{a.field, 1};
  switch (a.field.kind) {
    case FieldKind::Real:
    case FieldKind::QuadExtension:
      out.rep = a.rep * b.rep;
      break;
    case FieldKind::Complex:
      out.rep = 1;
      break;
    case FieldKind::PrimeField:
      out.rep = (a.rep == b.rep) ? 1 : (a.rep == 1 ? b.rep : a.rep);
      break;
    case FieldKind::Rational: {
      std::int64_t g = std::gcd(a.rep, b.rep);
      __int128 prod = static_cast<__int128>(a.rep / g) * (b.rep / g);
      if (prod > std::numeric_limits<std::int64_t>::max() || prod < -std::numeric_limits<std::int64_t>::max()) {
        throw std::range_error("square class product exceeds 64 bits");
      }
      out.rep = static_cast<std::int64_t>(prod);
      break;
    }
  }
  return out;
}

SquareClass square_class(double x) {
  if (x == 0.0) throw ZeroElement();
  return {FieldTag::real(), x > 0 ? 1 : -1};
}

SquareClass square_class(const Rational& x) {
  if (sgn(x) == 0) throw ZeroElement();
  std::int64_t num = squarefree_part(to_int64(x.get_num()));
  std::int64_t den = squarefree_part(to_int64(x.get_den()));
  return SquareClass{FieldTag::rational(), num} * SquareClass{FieldTag::rational(), den};
}

SquareClass square_class(const Fp& x) {
  if (x.value() == 0) throw ZeroElement();
  std::uint64_t p = x.modulus();
  if (is_square(x)) return {FieldTag::prime(p), 1};
  return {FieldTag::prime(p), static_cast<std::int64_t>(least_nonresidue(p))};
}

SquareClass square_class(const Fp2& x) {
  return {FieldTag::quad_ext(x.modulus()), is_square(x) ? 1 : -1};
}

SquareClass square_class(const Complex& x) {
  if (x == Complex(0.0, 0.0)) throw ZeroElement();
  return {FieldTag::complex(), 1};
}

bool is_square(double x) {
  if (x == 0.0) throw ZeroElement();
  return x > 0;
}

bool is_square(const Rational& x) {
  if (sgn(x) == 0) throw ZeroElement();
  if (sgn(x) < 0) return false;
  return mpz_perfect_square_p(x.get_num_mpz_t()) != 0 && mpz_perfect_square_p(x.get_den_mpz_t()) != 0;
}

bool is_square(const Fp& x) {
  if (x.value() == 0) throw ZeroElement();
  return x.pow((x.modulus() - 1) / 2).value() == 1;
}

bool is_square(const Fp2& x) {
  if (is_zero(x)) throw ZeroElement();
  std::uint64_t q = x.modulus() * x.modulus();
  Fp2 e = x.pow((q - 1) / 2);
  return e.c0() == 1 && e.c1() == 0;
}

bool is_square(const Complex& x) {
  if (x == Complex(0.0, 0.0)) throw ZeroElement();
  return true;
}

SquareClass square_class_of_int(const FieldTag& field, std::int64_t a) {
  switch (field.kind) {
    case FieldKind::Real: return square_class(static_cast<double>(a));
    case FieldKind::Complex: return square_class(Complex(static_cast<double>(a), 0.0));
    case FieldKind::Rational: return square_class(Rational(a));
    case FieldKind::PrimeField: return square_class(Fp(field.p, a));
    case FieldKind::QuadExtension: return square_class(QuadExtField::standard(field.p)(a));
  }
  throw UnsupportedField("unknown field");
}

FieldTag field_of(double) { return FieldTag::real(); }
FieldTag field_of(const Complex&) { return FieldTag::complex(); }
FieldTag field_of(const Rational&) { return FieldTag::rational(); }
FieldTag field_of(const Fp& x) { return FieldTag::prime(x.modulus()); }
FieldTag field_of(const Fp2& x) { return FieldTag::quad_ext(x.modulus()); }

// ---------------------------------------------------------------------------

std::string to_string(const Rational& q) { return q.get_num().get_str() + "/" + q.get_den().get_str(); }

Rational parse_rational(const std::string& text) {
  static const std::regex form(R"(^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, form)) throw std::invalid_argument("not a rational: '" + text + "'");
  mpz_class num(m[1].str()[0] == '+' ? m[1].str().substr(1) : m[1].str(), 10);
  mpz_class den(m[2].matched ? m[2].str() : std::string("1"), 10);
  if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite coordinate");
  Rational q(x);  // mpq_set_d is exact
  q.canonicalize();
  return q;
}

}  // namespace conics
