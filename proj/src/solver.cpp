#include "conics/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "conics/instance.hpp"

namespace conics {

namespace {

using Rng = std::mt19937_64;

Complex random_complex(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double re = n(rng);
  double im = n(rng);
  return {re, im};
}

Complex random_unit(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  return std::polar(1.0, u(rng));
}

template <int N>
Eigen::Matrix<Complex, N, 1> random_vector(Rng& rng) {
  Eigen::Matrix<Complex, N, 1> v;
  for (int k = 0; k < N; ++k) v(k) = random_complex(rng);
  return v;
}

bool finite(const VecX& v) { return v.allFinite(); }

// Linear solve that reports failure instead of producing inf/nan.
bool lin_solve(const MatX& m, const VecX& rhs, VecX& out) {
  Eigen::PartialPivLU<MatX> lu(m);
  out = lu.solve(rhs);
  return finite(out);
}

std::array<int, 3> free_slots(int i) {
  std::array<int, 3> s;
  for (int k = 0, m = 0; k < 4; ++k)
    if (k != i) s[m++] = k;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

HomotopySystem::HomotopySystem(const Chart& chart, const Lines8<Complex>& lines, std::uint64_t seed)
    : HomotopySystem(chart, lines, seed, [&] {
        Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
        return random_unit(rng);
      }()) {}

HomotopySystem::HomotopySystem(const Chart& chart, const Lines8<Complex>& lines, std::uint64_t seed, Complex gamma)
    : chart_(chart), lines_(lines), seed_(seed), gamma_(gamma) {
  const auto slot = free_slots(chart.i);
  for (int n = 0; n < 8; ++n) {
    const auto& p = lines[n].p();
    const auto& s = lines[n].s();
    for (int c = 0; c < 3; ++c)
      for (int l = 0; l < 4; ++l) proj_[n](c, l) = p[l] * s[slot[c]] - p[slot[c]] * s[l];
  }
  Rng rng(seed);
  for (int n = 0; n < 8; ++n) {
    u_[n] = random_vector<4>(rng);
    v_[n] = random_vector<4>(rng);
    w_[n] = random_vector<6>(rng);
  }
  patch_a_ = random_vector<4>(rng);
  patch_b_ = random_vector<6>(rng);
}

HomotopySystem HomotopySystem::with_gamma(Complex gamma) const {
  HomotopySystem copy = *this;
  copy.gamma_ = gamma;
  return copy;
}

void HomotopySystem::eval(const VecX& x, double t, VecX* h, MatX* hx, VecX* ht) const {
  const Eigen::Vector4cd a = x.head<4>();
  const Eigen::Matrix<Complex, 6, 1> b = x.tail<6>();
  if (h) h->resize(10);
  if (hx) hx->setZero(10, 10);
  if (ht) ht->resize(10);
  const Complex gt = gamma_ * t;
  const double ft = 1.0 - t;
  for (int n = 0; n < 8; ++n) {
    const Eigen::Vector3cd z = proj_[n] * a;
    const Vec3<Complex> zz{z(0), z(1), z(2)};
    ConicCoeffs<Complex> q;
    for (int k = 0; k < 6; ++k) q[k] = b(k);
    Complex f = 0.0;
    std::array<Complex, 6> mono;
    for (int k = 0; k < 6; ++k) {
      mono[k] = monomial(zz, k);
      f += q[k] * mono[k];
    }
    // Covectors pair without conjugation (Eigen's dot would conjugate).
    const Complex uA = (u_[n].transpose() * a)(0), vA = (v_[n].transpose() * a)(0), wB = (w_[n].transpose() * b)(0);
    const Complex g = uA * vA * wB;
    if (h) (*h)(n) = gt * g + ft * f;
    if (ht) (*ht)(n) = gamma_ * g - f;
    if (hx) {
      const Vec3<Complex> grad = conic_gradient(q, zz);
      const Eigen::RowVector3cd gz(grad[0], grad[1], grad[2]);
      const Eigen::RowVector4cd dfa = gz * proj_[n];
      const Eigen::RowVector4cd dga = (vA * u_[n].transpose() + uA * v_[n].transpose()) * wB;
      for (int l = 0; l < 4; ++l) (*hx)(n, l) = gt * dga(l) + ft * dfa(l);
      for (int k = 0; k < 6; ++k) (*hx)(n, 4 + k) = gt * uA * vA * w_[n](k) + ft * mono[k];
    }
  }
  if (h) {
    (*h)(8) = (patch_a_.transpose() * a)(0) - 1.0;
    (*h)(9) = (patch_b_.transpose() * b)(0) - 1.0;
  }
  if (ht) {
    (*ht)(8) = 0.0;
    (*ht)(9) = 0.0;
  }
  if (hx) {
    for (int l = 0; l < 4; ++l) (*hx)(8, l) = patch_a_(l);
    for (int k = 0; k < 6; ++k) (*hx)(9, 4 + k) = patch_b_(k);
  }
}

ChartPoint<Complex> HomotopySystem::to_chart(const VecX& x) const {
  ChartPoint<Complex> pt;
  pt.chart = chart_;
  for (int k = 0, m = 0; k < 4; ++k)
    if (k != chart_.i) pt.a[m++] = x(k) / x(chart_.i);
  for (int k = 0, m = 0; k < 6; ++k)
    if (k != chart_.j) pt.b[m++] = x(4 + k) / x(4 + chart_.j);
  return pt;
}

double HomotopySystem::affine_norm(const VecX& x) const {
  const double ai = std::abs(x(chart_.i)), bj = std::abs(x(4 + chart_.j));
  if (ai == 0.0 || bj == 0.0) return std::numeric_limits<double>::infinity();
  double out = 0.0;
  for (int k = 0; k < 4; ++k) out = std::max(out, std::abs(x(k)) / ai);
  for (int k = 0; k < 6; ++k) out = std::max(out, std::abs(x(4 + k)) / bj);
  return out;
}

VecX HomotopySystem::from_chart(const ChartPoint<Complex>& pt) const {
  const ChartPoint<Complex> q = pt.chart == chart_ ? pt : transition(pt, chart_);
  const Point3<Complex> a = insert_one(chart_.i, q.a);
  const ConicCoeffs<Complex> b = insert_one(chart_.j, q.b);
  VecX x(10);
  for (int k = 0; k < 4; ++k) x(k) = a[k];
  for (int k = 0; k < 6; ++k) x(4 + k) = b[k];
  x.head<4>() /= (patch_a_.transpose() * x.head<4>())(0);
  x.tail<6>() /= (patch_b_.transpose() * x.tail<6>())(0);
  return x;
}

double HomotopySystem::start_residual(const VecX& x) const {
  double r = 0.0;
  for (int n = 0; n < 8; ++n) {
    const Complex g = (u_[n].transpose() * x.head<4>())(0) * (v_[n].transpose() * x.head<4>())(0) *
                      (w_[n].transpose() * x.tail<6>())(0);
    r = std::max(r, std::abs(g));
  }
  return r;
}

std::vector<VecX> HomotopySystem::start_solutions() const {
  std::vector<VecX> out;
  out.reserve(448);
  for (int mask = 0; mask < 256; ++mask) {
    if (std::popcount(static_cast<unsigned>(mask)) != 3) continue;
    std::array<int, 3> in_s;
    std::array<int, 5> rest;
    for (int n = 0, si = 0, ri = 0; n < 8; ++n) (mask >> n & 1 ? in_s[si++] : rest[ri++]) = n;

    Eigen::Matrix<Complex, 6, 6> mb;
    Eigen::Matrix<Complex, 6, 1> rb = Eigen::Matrix<Complex, 6, 1>::Zero();
    for (int r = 0; r < 5; ++r) mb.row(r) = w_[rest[r]].transpose();
    mb.row(5) = patch_b_.transpose();
    rb(5) = 1.0;
    Eigen::FullPivLU<Eigen::Matrix<Complex, 6, 6>> lub(mb);
    if (!lub.isInvertible()) throw SingularStartSystem("singular b-block in start system");
    const Eigen::Matrix<Complex, 6, 1> b = lub.solve(rb);

    for (int choice = 0; choice < 8; ++choice) {
      Eigen::Matrix4cd ma;
      Eigen::Vector4cd ra = Eigen::Vector4cd::Zero();
      for (int r = 0; r < 3; ++r) ma.row(r) = ((choice >> r & 1) ? v_ : u_)[in_s[r]].transpose();
      ma.row(3) = patch_a_.transpose();
      ra(3) = 1.0;
      Eigen::FullPivLU<Eigen::Matrix4cd> lua(ma);
      if (!lua.isInvertible()) throw SingularStartSystem("singular a-block in start system");
      VecX x(10);
      x.head<4>() = lua.solve(ra);
      x.tail<6>() = b;
      const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
      if (start_residual(x) > 1e-12 * scale * scale * scale)
        throw SingularStartSystem("start solution residual above 1e-12");
      out.push_back(std::move(x));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

TotalDegreeHomotopy::TotalDegreeHomotopy(const Chart& chart, const Lines8<Complex>& lines, std::uint64_t seed)
    : chart_(chart), section_(chart, lines) {
  Rng rng(seed);
  gamma_ = random_unit(rng);
  patch_ = random_vector<9>(rng);
}

void TotalDegreeHomotopy::eval(const VecX& x, double t, VecX* h, MatX* hx, VecX* ht) const {
  if (h) h->resize(9);
  if (hx) hx->setZero(9, 9);
  if (ht) ht->resize(9);
  const Complex x0 = x(0);
  const Vec3<Complex> xa{x(1), x(2), x(3)};
  ConicCoeffs<Complex> q;
  for (int k = 0, m = 0; k < 6; ++k) q[k] = (k == chart_.j) ? x0 : x(4 + m++);
  const Complex gt = gamma_ * t;
  const double ft = 1.0 - t;
  for (int n = 0; n < 8; ++n) {
    const auto& zm = section_.zmap(n);
    Vec3<Complex> z;
    for (int c = 0; c < 3; ++c) z[c] = zm.offset[c] * x0 + zm.slope[0][c] * xa[0] + zm.slope[1][c] * xa[1] + zm.slope[2][c] * xa[2];
    const Complex f = eval_conic(q, z);
    const Complex xn = x(n + 1);
    const Complex g = xn * xn * xn - x0 * x0 * x0;
    if (h) (*h)(n) = gt * g + ft * f;
    if (ht) (*ht)(n) = gamma_ * g - f;
    if (hx) {
      const Vec3<Complex> grad = conic_gradient(q, z);
      auto along = [&](const Vec3<Complex>& d) { return grad[0] * d[0] + grad[1] * d[1] + grad[2] * d[2]; };
      Complex df0 = along(zm.offset) + monomial(z, chart_.j);
      (*hx)(n, 0) = gt * (-3.0 * x0 * x0) + ft * df0;
      for (int m = 0; m < 3; ++m) (*hx)(n, 1 + m) += ft * along(zm.slope[m]);
      for (int k = 0, m = 0; k < 6; ++k)
        if (k != chart_.j) (*hx)(n, 4 + m++) += ft * monomial(z, k);
      (*hx)(n, n + 1) += gt * 3.0 * xn * xn;
    }
  }
  if (h) (*h)(8) = (patch_.transpose() * x)(0) - 1.0;
  if (ht) (*ht)(8) = 0.0;
  if (hx)
    for (int k = 0; k < 9; ++k) (*hx)(8, k) = patch_(k);
}

ChartPoint<Complex> TotalDegreeHomotopy::to_chart(const VecX& x) const {
  ChartPoint<Complex> pt;
  pt.chart = chart_;
  for (int m = 0; m < 3; ++m) pt.a[m] = x(1 + m) / x(0);
  for (int m = 0; m < 5; ++m) pt.b[m] = x(4 + m) / x(0);
  return pt;
}

double TotalDegreeHomotopy::affine_norm(const VecX& x) const {
  const double x0 = std::abs(x(0));
  if (x0 == 0.0) return std::numeric_limits<double>::infinity();
  return x.tail<8>().cwiseAbs().maxCoeff() / x0;
}

std::vector<VecX> TotalDegreeHomotopy::start_solutions() const {
  std::vector<VecX> out;
  out.reserve(6561);
  const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  for (int code = 0; code < 6561; ++code) {
    VecX x(9);
    x(0) = 1.0;
    for (int n = 0, c = code; n < 8; ++n, c /= 3) x(n + 1) = std::pow(omega, c % 3);
    const Complex s = (patch_.transpose() * x)(0);
    out.push_back(x / s);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(PathStatus s) {
  switch (s) {
    case PathStatus::Converged: return "converged";
    case PathStatus::Diverged: return "diverged";
    case PathStatus::Failed: return "failed";
  }
  return "?";
}

std::string to_string(Reality r) { return r == Reality::Real ? "real" : "pair"; }

TrackedPath track(const Homotopy& hom, const VecX& start, const TrackOptions& opts) {
  TrackedPath path;
  path.start = start;
  VecX x = start;
  double t = 1.0;
  double h = opts.initial_step;
  int streak = 0;
  VecX hv, ht, k1, k2, k3, k4, dx;
  MatX hx;

  auto velocity = [&](const VecX& y, double tt, VecX& out) {
    hom.eval(y, tt, nullptr, &hx, &ht);
    return lin_solve(hx, -ht, out);
  };

  while (t > opts.t_final) {
    if (path.steps >= opts.max_steps) {
      path.status = PathStatus::Failed;
      path.note = "step limit";
      break;
    }
    ++path.steps;
    const double step = std::min(h, t - opts.t_final);
    const double dt = -step;
    bool ok = velocity(x, t, k1) && velocity(x + 0.5 * dt * k1, t + 0.5 * dt, k2) &&
              velocity(x + 0.5 * dt * k2, t + 0.5 * dt, k3) && velocity(x + dt * k3, t + dt, k4);
    VecX y;
    const double t_new = (step == t - opts.t_final) ? opts.t_final : t + dt;
    if (ok) {
      y = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ok = false;
      double prev = std::numeric_limits<double>::infinity();
      for (int it = 0; it < opts.corrector_iterations; ++it) {
        hom.eval(y, t_new, &hv, &hx, nullptr);
        if (!lin_solve(hx, -hv, dx)) break;
        const double nd = dx.norm();
        if (nd > 0.5 * prev) break;  // not contracting
        if (it == 0 && nd > opts.max_correction * (1.0 + y.norm())) break;
        y += dx;
        prev = nd;
        if (nd <= opts.corrector_tol * (1.0 + y.norm())) {
          ok = true;
          break;
        }
      }
    }
    if (!ok) {
      ++path.rejected;
      streak = 0;
      h *= 0.5;
      // The floor is relative near t = 0: genuine paths with an ill-conditioned
      // endpoint only settle once t is far below the absolute floor.
      if (h < opts.min_step * std::min(1.0, t)) {
        path.status = PathStatus::Failed;
        path.note = "step underflow";
        break;
      }
      continue;
    }
    x = y;
    t = t_new;
    if (path.endgame_t == 0.0 && t <= opts.endgame_t) {
      path.endgame_t = t;
      path.endgame_norm = hom.affine_norm(x);
    }
    if (++streak >= 3) {
      h = std::min(h * 1.5, opts.max_step);
      streak = 0;
    }
    if (hom.affine_norm(x) > opts.divergence_bound) {
      path.status = PathStatus::Diverged;
      break;
    }
  }
  if (t <= opts.t_final) path.status = PathStatus::Converged;
  path.endpoint = x;
  path.t_reached = t;
  path.final_norm = hom.affine_norm(x);
  return path;
}

double TrackedPath::growth() const {
  if (endgame_t == 0.0 || endgame_norm == 0.0 || t_reached >= endgame_t) return 0.0;
  const double t_end = std::max(t_reached, 1e-16);
  return std::log(final_norm / endgame_norm) / std::log(endgame_t / t_end);
}

// ---------------------------------------------------------------------------

namespace {

MatX to_eigen(const Matrix<Complex>& m) {
  MatX out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

template <class T>
double max_abs(const std::array<T, 8>& v) {
  double r = 0.0;
  for (const auto& x : v) r = std::max(r, std::abs(x));
  return r;
}

template <class T>
void apply_step(ChartPoint<T>& pt, const Eigen::Matrix<T, Eigen::Dynamic, 1>& dx) {
  for (int k = 0; k < 3; ++k) pt.a[k] += dx(k);
  for (int k = 0; k < 5; ++k) pt.b[k] += dx(3 + k);
}

}  // namespace

Refinement refine(const SectionSystem<Complex>& sys, ChartPoint<Complex> pt, double tol, int max_iter) {
  Refinement r{pt, 0.0, 0, false};
  for (;;) {
    const auto val = sys.eval(r.point);
    r.residual = max_abs(val);
    if (!std::isfinite(r.residual)) return r;
    if (r.residual < tol) {
      r.converged = true;
      return r;
    }
    if (r.iterations >= max_iter) return r;
    ++r.iterations;
    // Jacobian rows are variables, so Newton uses its transpose.
    const MatX jt = to_eigen(sys.jacobian_matrix(r.point)).transpose();
    VecX rhs(8);
    for (int n = 0; n < 8; ++n) rhs(n) = -val[n];
    VecX dx;
    if (!lin_solve(jt, rhs, dx)) return r;
    apply_step(r.point, dx);
  }
}

RealRefinement refine_real(const SectionSystem<double>& sys, ChartPoint<double> pt, double tol, int max_iter) {
  RealRefinement r{pt, 0.0, false};
  for (int it = 0;; ++it) {
    const auto val = sys.eval(r.point);
    r.residual = max_abs(val);
    if (!std::isfinite(r.residual)) return r;
    if (r.residual < tol) {
      r.converged = true;
      return r;
    }
    if (it >= max_iter) return r;
    const Matrix<double> j = sys.jacobian_matrix(r.point);
    Eigen::MatrixXd jt(8, 8);
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) jt(b, a) = j(a, b);
    Eigen::VectorXd rhs(8);
    for (int n = 0; n < 8; ++n) rhs(n) = -val[n];
    Eigen::VectorXd dx = jt.partialPivLu().solve(rhs);
    if (!dx.allFinite()) return r;
    apply_step(r.point, dx);
  }
}

std::size_t SolutionSet::real_count() const {
  return std::count_if(solutions.begin(), solutions.end(), [](const auto& s) { return s.reality == Reality::Real; });
}
std::size_t SolutionSet::pair_count() const { return solutions.size() - real_count(); }
std::size_t SolutionSet::positive() const {
  return std::count_if(solutions.begin(), solutions.end(), [](const auto& s) { return s.sign > 0; });
}
std::size_t SolutionSet::negative() const {
  return std::count_if(solutions.begin(), solutions.end(), [](const auto& s) { return s.sign < 0; });
}

ChartPoint<Complex> to_chart(const ChartPoint<Complex>& pt, const Chart& target) { return transition(pt, target); }

ChartPoint<Complex> conjugate(const ChartPoint<Complex>& pt) {
  ChartPoint<Complex> c = pt;
  for (auto& x : c.a) x = std::conj(x);
  for (auto& x : c.b) x = std::conj(x);
  return c;
}


namespace {

using Affine = std::array<Complex, 8>;

Affine flatten(const ChartPoint<Complex>& pt) {
  return {pt.a[0], pt.a[1], pt.a[2], pt.b[0], pt.b[1], pt.b[2], pt.b[3], pt.b[4]};
}

double rel_distance(const Affine& x, const Affine& y) {
  double d = 0.0, nx = 0.0, ny = 0.0;
  for (int k = 0; k < 8; ++k) {
    d = std::max(d, std::abs(x[k] - y[k]));
    nx = std::max(nx, std::abs(x[k]));
    ny = std::max(ny, std::abs(y[k]));
  }
  return d / (1.0 + std::max(nx, ny));
}

double max_coord(const ChartPoint<Complex>& pt) {
  double r = 0.0;
  for (const auto& x : pt.a) r = std::max(r, std::abs(x));
  for (const auto& x : pt.b) r = std::max(r, std::abs(x));
  return r;
}

double max_imag(const ChartPoint<Complex>& pt) {
  double r = 0.0;
  for (const auto& x : pt.a) r = std::max(r, std::abs(x.imag()));
  for (const auto& x : pt.b) r = std::max(r, std::abs(x.imag()));
  return r;
}

// Pair representative: first coordinate with a visible imaginary part has Im > 0.
bool upper(const ChartPoint<Complex>& pt, double tol) {
  for (const auto& x : flatten(pt))
    if (std::abs(x.imag()) > tol) return x.imag() > 0;
  return true;
}

// Chart maximizing |A_i| and |B_j| for a projective (plane, conic) pair.
Chart best_chart(const ChartPoint<Complex>& pt) {
  const auto e = chart_embed(pt);
  int bi = 0;
  for (int k = 1; k < 4; ++k)
    if (std::abs(e.plane.a[k]) > std::abs(e.plane.a[bi])) bi = k;
  const auto q = change_plane_chart(e.plane, e.coeffs, pt.chart.i, bi);
  int bj = 0;
  for (int k = 1; k < 6; ++k)
    if (std::abs(q[k]) > std::abs(q[bj])) bj = k;
  return Chart(bi, bj);
}

// Ratio of the chart's normalized coordinates to the largest coordinate.
double chart_margin(const ChartPoint<Complex>& pt) {
  double amax = 1.0, bmax = 1.0;
  for (const auto& x : pt.a) amax = std::max(amax, std::abs(x));
  for (const auto& x : pt.b) bmax = std::max(bmax, std::abs(x));
  return std::min(1.0 / amax, 1.0 / bmax);
}

// Relative distance below tol, comparing in the chart of y when charts differ.
bool same_point(const ChartPoint<Complex>& x, const ChartPoint<Complex>& y, double tol) {
  if (x.chart == y.chart) return rel_distance(flatten(x), flatten(y)) < tol;
  try {
    return rel_distance(flatten(transition(x, y.chart)), flatten(y)) < tol;
  } catch (const NotInChart&) {
    return false;
  }
}

struct Candidate {
  ChartPoint<Complex> point;
  double residual;
};

// Final status once refinement has been attempted.  A stalled path whose
// affine norm keeps growing like t^-c near t = 0 is heading for the chart
// boundary (the excess locus A_i = 0) and counts as diverged.
void settle(TrackedPath& p, bool refined, const TrackOptions& topts) {
  if (refined) {
    if (p.status == PathStatus::Failed) p.note = "recovered by endgame refinement";
    p.status = PathStatus::Converged;
    return;
  }
  if (p.status == PathStatus::Diverged) return;
  const double c = p.growth();
  if (p.final_norm > topts.divergence_bound || c > 0.05) {
    p.status = PathStatus::Diverged;
    p.note = "norm ~ t^-" + std::to_string(c);
  } else {
    p.status = PathStatus::Failed;
    if (p.note.empty()) p.note = "refinement did not converge";
  }
}

struct Context {
  Lines8<Rational> lines;
  Lines8<Complex> unit_lines;
  Lines8<Complex> raw_lines;
  Lines8<double> unit_real;
  SolverOptions opts;
};

std::optional<Candidate> finish_path(const Context& ctx, const Homotopy& hom, const TrackedPath& path,
                                    const TrackOptions& topts) {
  if (path.status == PathStatus::Diverged) return std::nullopt;
  if (path.status == PathStatus::Failed && path.t_reached > topts.endgame_t) return std::nullopt;
  const ChartPoint<Complex> start = hom.to_chart(path.endpoint);
  // Prefer the requested chart.  Near its boundary, or when large coordinates
  // keep the absolute residual above tolerance, use the chart where the conic
  // is most interior.
  std::vector<ChartPoint<Complex>> tries;
  auto add = [&](const Chart& c) {
    for (const auto& t : tries)
      if (t.chart == c) return;
    try {
      ChartPoint<Complex> pt = c == start.chart ? start : transition(start, c);
      if (chart_margin(pt) >= 1e-6) tries.push_back(pt);
    } catch (const std::exception&) {
    }
  };
  add(ctx.opts.chart);
  add(start.chart);
  try {
    add(best_chart(start));
  } catch (const std::exception&) {
  }
  for (const auto& pt : tries) {
    SectionSystem<Complex> sys(pt.chart, ctx.unit_lines);
    Refinement r = refine(sys, pt, ctx.opts.tol_residual);
    if (!r.converged) continue;
    // Newton started near the excess locus can wander to an unrelated zero;
    // only a local correction counts as the endpoint of this path.
    if (rel_distance(flatten(r.point), flatten(pt)) > 1e-4) continue;
    return Candidate{r.point, r.residual};
  }
  return std::nullopt;
}

std::vector<TrackedPath> run_paths(const Homotopy& hom, const std::vector<VecX>& starts, const std::vector<int>& which,
                                   const TrackOptions& topts, unsigned threads) {
  std::vector<TrackedPath> out(which.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < which.size();) {
      out[k] = track(hom, starts[which[k]], topts);
      out[k].index = which[k];
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

// Retry rounds move to the next plane chart and draw a fresh gamma.  A zero
// whose plane nearly passes through the chart's centre sits next to the excess
// locus of that chart and is only reached once the chart changes.
std::unique_ptr<Homotopy> make_homotopy(const Context& ctx, std::uint64_t seed, int round) {
  const Chart chart((ctx.opts.chart.i + round) % 4, ctx.opts.chart.j);
  if (ctx.opts.total_degree) {
    return std::make_unique<TotalDegreeHomotopy>(chart, ctx.unit_lines, seed + 7919ULL * round);
  }
  HomotopySystem base(chart, ctx.unit_lines, seed);
  if (round == 0) return std::make_unique<HomotopySystem>(base);
  Rng rng(seed + 104729ULL * round);
  return std::make_unique<HomotopySystem>(base.with_gamma(random_unit(rng)));
}

ConicSolution classify(const Context& ctx, const Candidate& c) {
  ConicSolution s;
  s.point = c.point;
  s.residual = c.residual;
  // Imaginary parts are judged relative to the coordinate scale: a real zero
  // with coordinates in the hundreds keeps ~1e-7 imaginary noise after complex
  // refinement.  Real Newton convergence is what makes the call.
  const double scale = 1.0 + max_coord(c.point);
  if (max_imag(c.point) < ctx.opts.tol_real * scale) {
    ChartPoint<double> rp;
    rp.chart = c.point.chart;
    for (int k = 0; k < 3; ++k) rp.a[k] = c.point.a[k].real();
    for (int k = 0; k < 5; ++k) rp.b[k] = c.point.b[k].real();
    SectionSystem<double> rsys(rp.chart, ctx.unit_real);
    auto rr = refine_real(rsys, rp, ctx.opts.tol_residual);
    ChartPoint<Complex> back = c.point;
    for (int k = 0; k < 3; ++k) back.a[k] = rr.point.a[k];
    for (int k = 0; k < 5; ++k) back.b[k] = rr.point.b[k];
    if (rr.converged && rel_distance(flatten(back), flatten(c.point)) < ctx.opts.tol_dedup) {
      s.reality = Reality::Real;
      s.residual = rr.residual;
      for (int k = 0; k < 3; ++k) s.point.a[k] = rr.point.a[k];
      for (int k = 0; k < 5; ++k) s.point.b[k] = rr.point.b[k];
    }
  }
  if (s.reality == Reality::Pair && !upper(s.point, ctx.opts.tol_real)) s.point = conjugate(s.point);
  SectionSystem<Complex> raw(s.point.chart, ctx.raw_lines);
  auto rec = raw.jacobian(s.point);
  s.jacobian = rec.determinant;
  s.oriented = rec.oriented;
  if (s.reality == Reality::Real) s.sign = s.oriented.real() > 0 ? 1 : -1;
  return s;
}

// Lexicographic order on coordinates rounded to 1e-6, ties broken exactly.
bool canonical_less(const ConicSolution& x, const ConicSolution& y) {
  if (!(x.point.chart == y.point.chart))
    return std::pair(x.point.chart.i, x.point.chart.j) < std::pair(y.point.chart.i, y.point.chart.j);
  const Affine fx = flatten(x.point), fy = flatten(y.point);
  auto rnd = [](double v) { return std::round(v * 1e6); };
  for (int pass = 0; pass < 2; ++pass)
    for (int k = 0; k < 8; ++k) {
      double a = pass == 0 ? fx[k].real() : fx[k].imag();
      double b = pass == 0 ? fy[k].real() : fy[k].imag();
      if (rnd(a) != rnd(b)) return rnd(a) < rnd(b);
    }
  for (int k = 0; k < 8; ++k) {
    if (fx[k].real() != fy[k].real()) return fx[k].real() < fy[k].real();
    if (fx[k].imag() != fy[k].imag()) return fx[k].imag() < fy[k].imag();
  }
  return false;
}

}  // namespace

SolutionSet solve_all(const Lines8<Rational>& lines, const SolverOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  Context ctx{lines, to_complex(lines, true), to_complex(lines, false), to_double(lines, true), opts};
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());

  TrackOptions topts;
  topts.max_steps = opts.max_steps;

  SolutionSet set;
  set.chart = opts.chart;
  std::vector<Candidate> pool;  // distinct endpoints in the chart where they were refined

  auto absorb = [&](const Candidate& c) {
    for (const auto& p : pool)
      if (same_point(c.point, p.point, opts.tol_dedup)) return;
    pool.push_back(c);
  };

  for (int round = 0; round <= opts.max_retries; ++round) {
    auto hom = make_homotopy(ctx, opts.seed, round);
    const std::vector<VecX> starts = hom->start_solutions();
    if (round == 0) set.paths = starts.size();
    std::vector<int> todo(starts.size());
    for (std::size_t k = 0; k < starts.size(); ++k) todo[k] = static_cast<int>(k);
    auto paths = run_paths(*hom, starts, todo, topts, threads);
    for (auto& p : paths) {
      auto cand = finish_path(ctx, *hom, p, topts);
      settle(p, cand.has_value(), topts);
      if (cand) absorb(*cand);
    }
    if (round == 0) {
      for (const auto& p : paths) {
        if (p.status == PathStatus::Converged) ++set.converged;
        else if (p.status == PathStatus::Diverged) ++set.diverged;
        else ++set.failed;
      }
    }
    if (opts.keep_paths) set.path_records.insert(set.path_records.end(), paths.begin(), paths.end());
    // Conjugate pairs sit in the pool twice, so its size is the conic count.
    if (pool.size() >= 92 || round == opts.max_retries) break;
    ++set.retries;
  }

  for (const auto& c : pool) set.solutions.push_back(classify(ctx, c));
  // Conjugate pairs appear twice in the pool; keep one representative.
  std::vector<ConicSolution> kept;
  for (const auto& s : set.solutions) {
    bool dup = false;
    for (const auto& k : kept) {
      if (k.reality != s.reality) continue;
      // Representatives are chosen per chart, so a pair stored in two charts
      // may be represented by opposite members.
      if (same_point(k.point, s.point, opts.tol_dedup) ||
          (s.reality == Reality::Pair && same_point(conjugate(k.point), s.point, opts.tol_dedup))) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(s);
  }
  std::sort(kept.begin(), kept.end(), canonical_less);
  set.solutions = std::move(kept);
  set.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (set.total() != 92) {
    auto partial = std::make_shared<SolutionSet>(set);
    throw CountMismatch("found " + std::to_string(set.total()) + " solutions (" + std::to_string(set.real_count()) +
                            " real, " + std::to_string(set.pair_count()) + " pairs) instead of 92; paths " +
                            std::to_string(set.converged) + " converged, " + std::to_string(set.diverged) +
                            " diverged, " + std::to_string(set.failed) + " failed",
                        partial);
  }
  return set;
}

GwForm assemble_enriched_count(const SolutionSet& set) {
  if (set.total() != 92) throw IncompleteSet("solution set has " + std::to_string(set.total()) + " of 92 conics");
  GwForm sum(FieldTag::real());
  for (const auto& s : set.solutions) {
    if (std::abs(s.oriented) == 0.0) throw SingularZero();
    if (s.reality == Reality::Real) sum.add(square_class_of_int(FieldTag::real(), s.sign), 1);
    else sum = sum + trace_form(s.oriented);
  }
  return sum;
}

}  // namespace conics
