#include "conics/gw.hpp"

#include <cctype>
#include <sstream>

namespace conics {

namespace {

void require_same_field(const GwForm& f, const GwForm& g) {
  if (!(f.field() == g.field())) {
    throw FieldMismatch("GW forms over different fields: " + f.field().name() + " vs " + g.field().name());
  }
}

SquareClass make_class(const FieldTag& field, std::int64_t rep) { return SquareClass{field, rep}; }

}  // namespace

GwForm GwForm::unit(const SquareClass& c) {
  GwForm f(c.field);
  f.add(c, 1);
  return f;
}

GwForm GwForm::from_int(const FieldTag& field, std::int64_t a, std::int64_t mult) {
  GwForm f(field);
  f.add(square_class_of_int(field, a), mult);
  return f;
}

GwForm GwForm::hyperbolic(const FieldTag& field, std::int64_t copies) {
  GwForm f(field);
  f.add(square_class_of_int(field, 1), copies);
  f.add(square_class_of_int(field, -1), copies);
  return f;
}

std::int64_t GwForm::multiplicity(std::int64_t rep) const {
  auto it = terms_.find(rep);
  return it == terms_.end() ? 0 : it->second;
}

bool GwForm::effective() const {
  for (const auto& [rep, mult] : terms_)
    if (mult < 0) return false;
  return true;
}

void GwForm::add(const SquareClass& c, std::int64_t mult) {
  if (!(c.field == field_)) throw FieldMismatch("square class over " + c.field.name() + " added to form over " + field_.name());
  if (mult == 0) return;
  auto& slot = terms_[c.rep];
  slot += mult;
  if (slot == 0) terms_.erase(c.rep);
}

GwForm GwForm::scaled(std::int64_t k) const {
  GwForm out(field_);
  if (k == 0) return out;
  for (const auto& [rep, mult] : terms_) out.terms_[rep] = mult * k;
  return out;
}

std::string GwForm::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [rep, mult] : terms_) {
    if (!first) os << (mult < 0 ? " - " : " + ");
    else if (mult < 0) os << "-";
    std::int64_t m = mult < 0 ? -mult : mult;
    if (m != 1) os << m << "*";
    os << "<" << rep << ">";
    first = false;
  }
  return os.str();
}

GwForm gw_add(const GwForm& f, const GwForm& g) {
  require_same_field(f, g);
  GwForm out = f;
  for (const auto& [rep, mult] : g.terms()) out.add(make_class(g.field(), rep), mult);
  return out;
}

GwForm gw_sub(const GwForm& f, const GwForm& g) { return gw_add(f, g.scaled(-1)); }

GwForm gw_mul(const GwForm& f, const GwForm& g) {
  require_same_field(f, g);
  GwForm out(f.field());
  for (const auto& [ra, ma] : f.terms())
    for (const auto& [rb, mb] : g.terms())
      out.add(make_class(f.field(), ra) * make_class(f.field(), rb), ma * mb);
  return out;
}

GwInvariants invariants(const GwForm& f) {
  GwInvariants inv;
  inv.discriminant = square_class_of_int(f.field(), 1);
  const auto kind = f.field().kind;
  const bool has_signature = kind == FieldKind::Real || kind == FieldKind::Rational;
  std::int64_t sig = 0;
  for (const auto& [rep, mult] : f.terms()) {
    inv.rank += mult;
    if (mult < 0) inv.negative_multiplicity = true;
    if (has_signature) sig += rep > 0 ? mult : -mult;
    // <a>^{-1} has the same class as <a>, so only the parity of mult matters.
    if (mult % 2 != 0) inv.discriminant = inv.discriminant * make_class(f.field(), rep);
  }
  if (has_signature) inv.signature = sig;
  return inv;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Equal: return "equal";
    case Verdict::NotEqual: return "not_equal";
    case Verdict::Undecided: return "undecided";
  }
  return "?";
}

Verdict gw_equal(const GwForm& f, const GwForm& g) {
  require_same_field(f, g);
  if (f == g) return Verdict::Equal;
  const GwInvariants a = invariants(f), b = invariants(g);
  if (a.rank != b.rank) return Verdict::NotEqual;
  switch (f.field().kind) {
    case FieldKind::Complex:
      return Verdict::Equal;
    case FieldKind::Real:
      return a.signature == b.signature ? Verdict::Equal : Verdict::NotEqual;
    case FieldKind::PrimeField:
    case FieldKind::QuadExtension:
      return a.discriminant == b.discriminant ? Verdict::Equal : Verdict::NotEqual;
    case FieldKind::Rational:
      if (a.signature != b.signature || !(a.discriminant == b.discriminant)) return Verdict::NotEqual;
      return Verdict::Undecided;
  }
  return Verdict::Undecided;
}

GwForm trace_form(const Complex& a) {
  if (a == Complex(0.0, 0.0)) throw ZeroElement();
  const Complex basis[2] = {Complex(1.0, 0.0), Complex(0.0, 1.0)};
  Matrix<double> g(2, 2, 0.0);
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v) g(u, v) = 2.0 * (a * basis[u] * basis[v]).real();
  return diagonalize_gram(GramMatrix<double>(g));
}

GwForm trace_form(const Fp2& a) {
  if (is_zero(a)) throw ZeroElement();
  const Fp2 basis[2] = {one_like(a), Fp2(a.modulus(), a.e0(), a.e1(), 0, 1)};
  Matrix<Fp> g(2, 2, Fp(a.modulus(), 0));
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v) g(u, v) = field_trace(a * basis[u] * basis[v]);
  return diagonalize_gram(GramMatrix<Fp>(g));
}

// expr := ['-'] term (('+' | '-') term)*      term := [n ['*']] ('<' a '>' | 'H')
GwForm parse_gw(const std::string& text, const FieldTag& field) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  auto fail = [&](const std::string& why) -> GwForm { throw std::invalid_argument("bad form \"" + text + "\": " + why); };
  if (t.empty()) return fail("empty");
  if (t == "0") return GwForm(field);

  std::size_t pos = 0;
  auto read_int = [&](bool allow_sign) -> std::optional<std::int64_t> {
    std::size_t start = pos;
    if (allow_sign && pos < t.size() && (t[pos] == '-' || t[pos] == '+')) ++pos;
    std::size_t digits = pos;
    while (pos < t.size() && std::isdigit(static_cast<unsigned char>(t[pos]))) ++pos;
    if (pos == digits) {
      pos = start;
      return std::nullopt;
    }
    try {
      return std::stoll(t.substr(start, pos - start));
    } catch (const std::out_of_range&) {
      fail("integer out of range");
    }
    return std::nullopt;
  };

  GwForm out(field);
  bool first = true;
  while (pos < t.size()) {
    std::int64_t sign = 1;
    if (t[pos] == '+' || t[pos] == '-') {
      if (first && t[pos] == '+') fail("leading '+'");
      sign = t[pos] == '-' ? -1 : 1;
      ++pos;
    } else if (!first) {
      fail("expected '+' or '-' at position " + std::to_string(pos));
    }
    first = false;
    std::int64_t mult = 1;
    if (auto n = read_int(false)) {
      mult = *n;
      if (pos < t.size() && t[pos] == '*') ++pos;
    }
    if (pos < t.size() && t[pos] == 'H') {
      ++pos;
      out = out + GwForm::hyperbolic(field, sign * mult);
    } else if (pos < t.size() && t[pos] == '<') {
      ++pos;
      auto a = read_int(true);
      if (!a || pos >= t.size() || t[pos] != '>') fail("expected <integer>");
      ++pos;
      if (*a == 0) fail("<0> is not a form");
      out = out + GwForm::from_int(field, *a, sign * mult);
    } else {
      fail("expected 'H' or '<' at position " + std::to_string(pos));
    }
  }
  return out;
}

}  // namespace conics
