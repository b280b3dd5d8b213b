#include "conics/bruteforce.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

namespace conics {

namespace {

// F_q with q <= 9 as indices 0..q-1 (0 is zero, 1 is one) and full
// addition / multiplication tables, so the inner enumeration loop is pure
// table lookups.
template <class T>
struct Elements {
  std::uint64_t p = 0;
  int q = 0;
  std::vector<T> all;
  std::vector<std::uint8_t> add, mul;

  int index(const T& x) const {
    if constexpr (std::is_same_v<T, Fp>) {
      return static_cast<int>(x.value());
    } else {
      return static_cast<int>(x.c0() + p * x.c1());
    }
  }

  void build_tables() {
    q = static_cast<int>(all.size());
    add.resize(q * q);
    mul.resize(q * q);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) {
        add[a * q + b] = static_cast<std::uint8_t>(index(all[a] + all[b]));
        mul[a * q + b] = static_cast<std::uint8_t>(index(all[a] * all[b]));
      }
  }
};

Elements<Fp> prime_elements(std::uint64_t p) {
  Elements<Fp> el;
  el.p = p;
  for (std::uint64_t v = 0; v < p; ++v) el.all.emplace_back(p, static_cast<std::int64_t>(v));
  el.build_tables();
  return el;
}

Elements<Fp2> quadratic_elements(std::uint64_t p) {
  const QuadExtField f = QuadExtField::standard(p);
  Elements<Fp2> el;
  el.p = p;
  for (std::uint64_t c1 = 0; c1 < p; ++c1)
    for (std::uint64_t c0 = 0; c0 < p; ++c0) el.all.push_back(f(static_cast<std::int64_t>(c0), static_cast<std::int64_t>(c1)));
  el.build_tables();
  return el;
}

// Normalized representatives of P^{n-1}(F_q): first nonzero coordinate 1.
std::vector<std::vector<std::uint8_t>> projective_reps(int q, int n) {
  std::vector<std::vector<std::uint8_t>> out;
  for (int lead = 0; lead < n; ++lead) {
    const int free = n - 1 - lead;
    std::size_t count = 1;
    for (int k = 0; k < free; ++k) count *= q;
    for (std::size_t code = 0; code < count; ++code) {
      std::vector<std::uint8_t> rep(n, 0);
      rep[lead] = 1;
      std::size_t c = code;
      for (int k = n - 1; k > lead; --k) {
        rep[k] = static_cast<std::uint8_t>(c % q);
        c /= q;
      }
      out.push_back(std::move(rep));
    }
  }
  return out;
}

template <class T, std::size_t N>
int first_nonzero(const std::array<T, N>& x) {
  for (std::size_t k = 0; k < N; ++k)
    if (!is_zero(x[k])) return static_cast<int>(k);
  return -1;
}

template <class T, std::size_t N>
std::array<T, N> normalized(std::array<T, N> x) {
  const int lead = first_nonzero(x);
  const T inv = one_like(x[lead]) / x[lead];
  for (auto& v : x) v *= inv;
  return x;
}

template <class T>
bool phi_vanishes(const SectionSystem<T>& sys, const ChartPoint<T>& pt) {
  const ConicCoeffs<T> q = insert_one(pt.chart.j, pt.b);
  for (int n = 0; n < 8; ++n)
    if (!is_zero(eval_conic(q, sys.z(n, pt.a)))) return false;
  return true;
}

template <class T>
struct Candidate {
  std::size_t plane = 0, conic = 0;
  friend bool operator<(const Candidate& x, const Candidate& y) {
    return std::pair(x.plane, x.conic) < std::pair(y.plane, y.conic);
  }
};

// Compares Phi with the oracle verdict in every chart containing (h, q).
template <class T>
void compare_charts(const std::vector<SectionSystem<T>>& systems, const Plane3<T>& h, int lead,
                    const ConicCoeffs<T>& q, bool oracle_zero, std::size_t& evals, std::size_t& disc) {
  std::array<std::optional<ConicCoeffs<T>>, 4> in_chart;
  for (const auto& sys : systems) {
    const Chart c = sys.chart();
    if (is_zero(h.a[c.i])) continue;
    if (!in_chart[c.i]) in_chart[c.i] = change_plane_chart(h, q, lead, c.i);
    if (is_zero((*in_chart[c.i])[c.j])) continue;
    const ChartPoint<T> pt = chart_coords(h, *in_chart[c.i], c);
    ++evals;
    if (phi_vanishes(sys, pt) != oracle_zero) ++disc;
  }
}

template <class T>
BruteForceResult<T> search(const Lines8<T>& lines, const Elements<T>& el, int degree, const BruteForceOptions& opts) {
  BruteForceResult<T> result;
  result.p = el.p;
  result.degree = degree;
  const int q = el.q;
  const auto planes = projective_reps(q, 4);
  const auto conics = projective_reps(q, 6);
  result.candidates = planes.size() * conics.size();
  const bool cross = opts.cross_check && degree == 1;

  std::vector<SectionSystem<T>> systems;
  for (const Chart& c : all_charts()) systems.emplace_back(c, lines);

  auto plane_of = [&](std::size_t k) {
    Plane3<T> h;
    for (int c = 0; c < 4; ++c) h.a[c] = el.all[planes[k][c]];
    return h;
  };
  auto conic_of = [&](std::size_t k) {
    ConicCoeffs<T> b;
    for (int c = 0; c < 6; ++c) b[c] = el.all[conics[k][c]];
    return b;
  };

  std::vector<Candidate<T>> hits;
  std::size_t evals = 0, disc = 0;
  std::mutex merge;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    std::vector<Candidate<T>> local_hits;
    std::size_t local_evals = 0, local_disc = 0;
    for (std::size_t k; (k = next.fetch_add(1)) < planes.size();) {
      const Plane3<T> h = plane_of(k);
      const int lead = first_nonzero(h.a);
      // Oracle: monomials of the 8 intersection points, or "line inside the
      // plane", in which case component n vanishes for every conic.
      std::array<std::array<std::uint8_t, 6>, 8> mono{};
      std::array<bool, 8> inside{};
      for (int n = 0; n < 8; ++n) {
        try {
          const Vec3<T> z = plane_coords(lead, meet_plane_oracle(lines[n], h));
          for (int m = 0; m < 6; ++m) mono[n][m] = static_cast<std::uint8_t>(el.index(monomial(z, m)));
        } catch (const LineInPlane&) {
          inside[n] = true;
        }
      }
      for (std::size_t c = 0; c < conics.size(); ++c) {
        const auto& b = conics[c];
        bool zero = true;
        for (int n = 0; n < 8 && zero; ++n) {
          if (inside[n]) continue;
          int acc = 0;
          for (int m = 0; m < 6; ++m) acc = el.add[acc * q + el.mul[b[m] * q + mono[n][m]]];
          zero = acc == 0;
        }
        if (zero) local_hits.push_back({k, c});
        if (cross) compare_charts(systems, h, lead, conic_of(c), zero, local_evals, local_disc);
      }
    }
    std::lock_guard<std::mutex> lock(merge);
    hits.insert(hits.end(), local_hits.begin(), local_hits.end());
    evals += local_evals;
    disc += local_disc;
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(planes.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::sort(hits.begin(), hits.end());

  for (const auto& hit : hits) {
    FqSolution<T> sol;
    sol.plane = plane_of(hit.plane);
    sol.plane_chart = first_nonzero(sol.plane.a);
    sol.conic = conic_of(hit.conic);
    if constexpr (std::is_same_v<T, Fp2>) {
      auto base = [](const Fp2& x) { return x.in_base_field(); };
      sol.over_base_field = std::all_of(sol.plane.a.begin(), sol.plane.a.end(), base) &&
                            std::all_of(sol.conic.begin(), sol.conic.end(), base);
    }
    if (!cross) compare_charts(systems, sol.plane, sol.plane_chart, sol.conic, true, evals, disc);
    for (const auto& sys : systems) {
      const Chart c = sys.chart();
      if (is_zero(sol.plane.a[c.i])) continue;
      const ConicCoeffs<T> qc = change_plane_chart(sol.plane, sol.conic, sol.plane_chart, c.i);
      if (is_zero(qc[c.j])) continue;
      const ChartPoint<T> pt = chart_coords(sol.plane, qc, c);
      const JacobianRecord<T> rec = sys.jacobian(pt);
      sol.charts.push_back({c, pt, rec.determinant, rec.oriented});
    }
    result.solutions.push_back(std::move(sol));
  }
  result.chart_evaluations = evals;
  result.discrepancies = disc;
  return result;
}

void check_prime(const Lines8<Fp>& lines, int degree) {
  const std::uint64_t p = lines[0].p()[0].modulus();
  if (p == 2 || !is_prime(p)) throw std::invalid_argument("brute force needs an odd prime field");
  std::uint64_t q = p;
  for (int d = 1; d < degree; ++d) q *= p;
  if (q > 9) throw TooLarge("enumeration over F_" + std::to_string(q) + " is too large (q <= 9 supported)");
}

}  // namespace

template <class T>
bool FqSolution<T>::singular() const {
  return std::any_of(charts.begin(), charts.end(), [](const auto& r) { return is_zero(r.determinant); });
}

template <class T>
bool chart_compatible(const FqSolution<T>& s) {
  if (s.charts.empty() || s.singular()) return false;
  const T base = s.charts.front().oriented;
  for (const auto& r : s.charts)
    if (!is_square(r.oriented / base)) return false;
  return true;
}

GwForm fq_local_index(const FqSolution<Fp>& s) {
  if (s.charts.empty() || s.singular()) throw SingularZero();
  return GwForm::unit(square_class(s.charts.front().oriented));
}

GwForm fq_local_index(const FqSolution<Fp2>& s) {
  if (s.charts.empty() || s.singular()) throw SingularZero();
  const Fp2& det = s.charts.front().oriented;
  if (s.over_base_field) return GwForm::unit(square_class(base_part(det)));
  return trace_form(det);
}

template <class T>
std::optional<std::size_t> find_solution(const BruteForceResult<T>& result, const ChartPoint<T>& pt) {
  const EmbeddedConic<T> e = chart_embed(pt);
  const int lead = first_nonzero(e.plane.a);
  const Point3<T> plane = normalized(e.plane.a);
  const ConicCoeffs<T> conic = normalized(change_plane_chart(e.plane, e.coeffs, pt.chart.i, lead));
  for (std::size_t k = 0; k < result.solutions.size(); ++k) {
    const auto& s = result.solutions[k];
    if (s.plane.a == plane && s.conic == conic) return k;
  }
  return std::nullopt;
}

Lines8<Fp2> embed_lines(const Lines8<Fp>& lines) {
  const QuadExtField f = QuadExtField::standard(lines[0].p()[0].modulus());
  auto up = [&](const Point3<Fp>& x) { return Point3<Fp2>{f.embed(x[0]), f.embed(x[1]), f.embed(x[2]), f.embed(x[3])}; };
  std::vector<Line3<Fp2>> out;
  for (const auto& l : lines) out.emplace_back(up(l.p()), up(l.s()));
  return {out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7]};
}

ChartPoint<Fp2> embed_point(const ChartPoint<Fp>& pt) {
  const QuadExtField f = QuadExtField::standard(pt.a[0].modulus());
  ChartPoint<Fp2> out;
  out.chart = pt.chart;
  for (int k = 0; k < 3; ++k) out.a[k] = f.embed(pt.a[k]);
  for (int k = 0; k < 5; ++k) out.b[k] = f.embed(pt.b[k]);
  return out;
}

BruteForceResult<Fp> brute_force_fq(const Lines8<Fp>& lines, const BruteForceOptions& opts) {
  check_prime(lines, 1);
  return search(lines, prime_elements(lines[0].p()[0].modulus()), 1, opts);
}

BruteForceResult<Fp2> brute_force_fq2(const Lines8<Fp>& lines, const BruteForceOptions& opts) {
  check_prime(lines, 2);
  return search(embed_lines(lines), quadratic_elements(lines[0].p()[0].modulus()), 2, opts);
}

template struct FqSolution<Fp>;
template struct FqSolution<Fp2>;
template bool chart_compatible(const FqSolution<Fp>&);
template bool chart_compatible(const FqSolution<Fp2>&);
template std::optional<std::size_t> find_solution(const BruteForceResult<Fp>&, const ChartPoint<Fp>&);
template std::optional<std::size_t> find_solution(const BruteForceResult<Fp2>&, const ChartPoint<Fp2>&);

}  // namespace conics
