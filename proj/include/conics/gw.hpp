#pragma once

// Grothendieck-Witt group arithmetic.  A GwForm is a formal Z-combination of
// rank-one classes <a>, keyed by the canonical square-class representative of
// a.  Sums and products act on the representation only; equality is decided
// through field invariants by gw_equal.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "conics/fields.hpp"
#include "conics/linalg.hpp"

namespace conics {

class Degenerate : public std::domain_error {
 public:
  Degenerate() : std::domain_error("degenerate symmetric bilinear form (det = 0)") {}
};

class UnsupportedExtension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GwForm {
 public:
  explicit GwForm(FieldTag field) : field_(field) {}

  static GwForm unit(const SquareClass& c);  // <a>
  static GwForm from_int(const FieldTag& field, std::int64_t a, std::int64_t mult = 1);
  static GwForm hyperbolic(const FieldTag& field, std::int64_t copies = 1);

  const FieldTag& field() const { return field_; }
  /// representative -> nonzero multiplicity
  const std::map<std::int64_t, std::int64_t>& terms() const { return terms_; }
  std::int64_t multiplicity(std::int64_t rep) const;
  /// All multiplicities positive: an honest (non-virtual) form.
  bool effective() const;
  bool empty() const { return terms_.empty(); }

  void add(const SquareClass& c, std::int64_t mult);
  GwForm scaled(std::int64_t k) const;
  std::string str() const;

  friend bool operator==(const GwForm&, const GwForm&) = default;

 private:
  FieldTag field_;
  std::map<std::int64_t, std::int64_t> terms_;
};

GwForm gw_add(const GwForm& f, const GwForm& g);
GwForm gw_sub(const GwForm& f, const GwForm& g);
GwForm gw_mul(const GwForm& f, const GwForm& g);
inline GwForm operator+(const GwForm& f, const GwForm& g) { return gw_add(f, g); }
inline GwForm operator-(const GwForm& f, const GwForm& g) { return gw_sub(f, g); }
inline GwForm operator*(const GwForm& f, const GwForm& g) { return gw_mul(f, g); }

struct GwInvariants {
  std::int64_t rank = 0;
  std::optional<std::int64_t> signature;  // R, and Q via the real embedding
  SquareClass discriminant;
  bool negative_multiplicity = false;  // flag for virtual forms, not an error
};

GwInvariants invariants(const GwForm& f);

/// Parses sums such as "<1> + <-1>", "46*H", "2<3> - <5>" or "0" into a form
/// over `field`; H is <1> + <-1>.  Throws std::invalid_argument.
GwForm parse_gw(const std::string& text, const FieldTag& field);

enum class Verdict { Equal, NotEqual, Undecided };
std::string to_string(Verdict v);

/// Decision by invariants: R rank+signature, F_p rank+discriminant, C rank.
/// Over Q a disagreement is conclusive but agreement only yields Undecided
/// (unless the normalized representations coincide).
Verdict gw_equal(const GwForm& f, const GwForm& g);

/// Symmetric matrix of field elements.
template <class T>
class GramMatrix {
 public:
  explicit GramMatrix(Matrix<T> m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols()) throw std::invalid_argument("Gram matrix must be square, n >= 1");
    for (std::size_t r = 0; r < m_.rows(); ++r)
      for (std::size_t c = r + 1; c < m_.cols(); ++c)
        if (!(m_(r, c) == m_(c, r))) throw std::invalid_argument("Gram matrix must be symmetric");
  }
  const Matrix<T>& matrix() const { return m_; }
  std::size_t size() const { return m_.rows(); }

 private:
  Matrix<T> m_;
};

/// Congruence diagonalization: leftmost nonzero diagonal pivot first; a zero
/// pivot with a nonzero partner is repaired by e_k <- e_k + e_m.  Floating
/// point entries below 1e-12 of the largest entry count as zero.
template <class T>
GwForm diagonalize_gram(const GramMatrix<T>& gram) {
  Matrix<T> g = gram.matrix();
  const std::size_t n = gram.size();
  GwForm result(field_of(g(0, 0)));
  double scale = 0.0;
  if constexpr (!is_exact_v<T>) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) scale = std::max(scale, magnitude(g(r, c)));
  }
  auto negligible = [&](const T& x) {
    if constexpr (is_exact_v<T>) {
      return is_zero(x);
    } else {
      return magnitude(x) <= 1e-12 * scale;
    }
  };
  auto sym_swap = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    g.swap_rows(a, b);
    for (std::size_t r = 0; r < n; ++r) std::swap(g(r, a), g(r, b));
  };
  // e_a <- e_a + e_b
  auto sym_add = [&](std::size_t a, std::size_t b) {
    for (std::size_t c = 0; c < n; ++c) g(a, c) += g(b, c);
    for (std::size_t r = 0; r < n; ++r) g(r, a) += g(r, b);
  };

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = n;
    for (std::size_t r = k; r < n; ++r)
      if (!negligible(g(r, r))) {
        piv = r;
        break;
      }
    if (piv == n) {
      std::size_t a = n, b = n;
      for (std::size_t r = k; r < n && a == n; ++r)
        for (std::size_t c = r + 1; c < n; ++c)
          if (!negligible(g(r, c))) {
            a = r;
            b = c;
            break;
          }
      if (a == n) throw Degenerate();
      sym_add(a, b);
      piv = a;
    }
    sym_swap(k, piv);
    const T pivot = g(k, k);
    for (std::size_t r = k + 1; r < n; ++r) {
      if (is_zero(g(r, k))) continue;
      T f = g(r, k) / pivot;
      for (std::size_t c = k; c < n; ++c) g(r, c) -= f * g(k, c);
      for (std::size_t c = k; c < n; ++c) g(c, r) = g(r, c);
    }
    result.add(square_class(pivot), 1);
  }
  return result;
}

/// Tr_{C/R}<a>: Gram matrix of (x, y) -> Tr(a x y) on the basis {1, i}.
GwForm trace_form(const Complex& a);
/// Tr_{F_{p^2}/F_p}<a> on the basis {1, t}.
GwForm trace_form(const Fp2& a);
/// Trivial extension k/k: <a>.
template <class T>
GwForm trace_form_trivial(const T& a) {
  return GwForm::unit(square_class(a));
}

}  // namespace conics
