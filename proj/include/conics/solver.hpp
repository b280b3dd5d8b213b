#pragma once

// Homotopy continuation for Phi_ij = 0 over C.
//
// Unknowns are tracked in multi-homogeneous form: A in C^4 (plane), B in C^6
// (conic), each fixed to a random affine patch r.x = 1.  The target equations
// are f_n = q_B(drop_i(K^n A)); the start system is the product
// g_n = (u_n.A)(v_n.A)(w_n.B), which has C(8,3) 2^3 = 448 regular solutions.
// Only 92 paths end inside the chart; the rest run into A_i = 0, where the
// eight projected points become collinear and f has a positive-dimensional
// zero set.

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conics/gw.hpp"
#include "conics/section.hpp"

namespace conics {

using VecX = Eigen::VectorXcd;
using MatX = Eigen::MatrixXcd;

class SingularStartSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IncompleteSet : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// H(x, t) = gamma t g(x) + (1 - t) f(x), plus any patch equations.
class Homotopy {
 public:
  virtual ~Homotopy() = default;
  virtual int dim() const = 0;
  /// h = H(x, t); hx = dH/dx; ht = dH/dt.  Pointers may be null.
  virtual void eval(const VecX& x, double t, VecX* h, MatX* hx, VecX* ht) const = 0;
  /// Affine chart coordinates of a projective state vector.
  virtual ChartPoint<Complex> to_chart(const VecX& x) const = 0;
  /// Largest affine coordinate magnitude; grows without bound on diverging paths.
  virtual double affine_norm(const VecX& x) const = 0;
  virtual std::vector<VecX> start_solutions() const = 0;
  virtual Complex gamma() const = 0;
};

/// The 448-path product homotopy in P^3 x P^5.
class HomotopySystem : public Homotopy {
 public:
  HomotopySystem(const Chart& chart, const Lines8<Complex>& lines, std::uint64_t seed, Complex gamma);
  HomotopySystem(const Chart& chart, const Lines8<Complex>& lines, std::uint64_t seed);

  int dim() const override { return 10; }
  void eval(const VecX& x, double t, VecX* h, MatX* hx, VecX* ht) const override;
  ChartPoint<Complex> to_chart(const VecX& x) const override;
  double affine_norm(const VecX& x) const override;
  /// All 448 start solutions, each checked to satisfy g = 0 to 1e-12.
  std::vector<VecX> start_solutions() const override;
  Complex gamma() const override { return gamma_; }

  HomotopySystem with_gamma(Complex gamma) const;
  /// Projective state (on the patches) of an affine chart point.
  VecX from_chart(const ChartPoint<Complex>& pt) const;
  /// max_n |g_n(x)|
  double start_residual(const VecX& x) const;

 private:
  Chart chart_;
  Lines8<Complex> lines_;
  std::uint64_t seed_;
  Complex gamma_;
  std::array<Eigen::Matrix<Complex, 3, 4>, 8> proj_;  // z^n = proj_[n] * A
  std::array<Eigen::Vector4cd, 8> u_, v_;
  std::array<Eigen::Matrix<Complex, 6, 1>, 8> w_;
  Eigen::Vector4cd patch_a_;
  Eigen::Matrix<Complex, 6, 1> patch_b_;
};

/// Total-degree homotopy on P^8 (3^8 = 6561 paths), for cross-validation.
class TotalDegreeHomotopy : public Homotopy {
 public:
  TotalDegreeHomotopy(const Chart& chart, const Lines8<Complex>& lines, std::uint64_t seed);
  int dim() const override { return 9; }
  void eval(const VecX& x, double t, VecX* h, MatX* hx, VecX* ht) const override;
  ChartPoint<Complex> to_chart(const VecX& x) const override;
  double affine_norm(const VecX& x) const override;
  std::vector<VecX> start_solutions() const override;
  Complex gamma() const override { return gamma_; }

 private:
  Chart chart_;
  SectionSystem<Complex> section_;
  Complex gamma_;
  Eigen::Matrix<Complex, 9, 1> patch_;
};

enum class PathStatus { Converged, Diverged, Failed };
std::string to_string(PathStatus s);

struct TrackOptions {
  double min_step = 1e-7;
  double max_step = 0.1;
  double initial_step = 0.05;
  double divergence_bound = 1e8;
  double corrector_tol = 1e-10;
  int corrector_iterations = 3;
  /// Largest first Newton correction accepted, relative to 1 + |x|; guards
  /// against the corrector landing on a neighbouring path.
  double max_correction = 1e-3;
  int max_steps = 20000;
  double t_final = 0.0;
  /// Below this t the affine norm is sampled to estimate its growth rate.
  double endgame_t = 1e-4;
};

struct TrackedPath {
  int index = -1;
  VecX start;
  PathStatus status = PathStatus::Failed;
  VecX endpoint;  // projective state at the last accepted t
  double t_reached = 1.0;
  int steps = 0;
  int rejected = 0;
  double final_norm = 0.0;
  /// Affine norm at the first accepted t <= endgame_t (0 if never reached).
  double endgame_norm = 0.0;
  double endgame_t = 0.0;
  std::string note;

  /// Fitted exponent c in norm ~ t^-c over the endgame stretch.
  double growth() const;
};

/// Predictor (classical RK4 on the Davidenko equation) plus Newton corrector
/// from t = 1 down to opts.t_final.
TrackedPath track(const Homotopy& hom, const VecX& start, const TrackOptions& opts = {});

enum class Reality { Real, Pair };
std::string to_string(Reality r);

struct ConicSolution {
  ChartPoint<Complex> point;
  Complex jacobian;       // det Jac for the lines as given
  Complex oriented;       // (-1)^(i+j) det, the value whose sign defines positivity
  Reality reality = Reality::Pair;
  int sign = 0;           // +-1 for real solutions, 0 for pairs
  double residual = 0.0;  // max |Phi^n| with unit-norm line representatives
};

struct SolverOptions {
  std::uint64_t seed = 42;
  Chart chart{0, 0};
  double tol_residual = 1e-12;
  double tol_dedup = 1e-6;
  double tol_real = 1e-8;
  int max_steps = 20000;
  bool total_degree = false;
  unsigned threads = 0;  // 0: hardware concurrency
  int max_retries = 3;
  bool keep_paths = false;
};

struct SolutionSet {
  Chart chart;
  std::vector<ConicSolution> solutions;  // real ones, and one representative per pair
  std::size_t paths = 0;
  std::size_t converged = 0, diverged = 0, failed = 0;
  int retries = 0;
  double seconds = 0.0;
  std::vector<TrackedPath> path_records;  // only with keep_paths

  std::size_t real_count() const;
  std::size_t pair_count() const;
  /// real + 2 * pairs
  std::size_t total() const { return real_count() + 2 * pair_count(); }
  std::size_t positive() const;
  std::size_t negative() const;
};

class CountMismatch : public std::runtime_error {
 public:
  CountMismatch(const std::string& what, std::shared_ptr<SolutionSet> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SolutionSet& partial() const { return *partial_; }

 private:
  std::shared_ptr<SolutionSet> partial_;
};

/// Newton on the affine system Phi_ij = 0 until max |Phi| < tol or 50 iterations.
struct Refinement {
  ChartPoint<Complex> point;
  double residual;
  int iterations;
  bool converged;
};
Refinement refine(const SectionSystem<Complex>& sys, ChartPoint<Complex> pt, double tol = 1e-12, int max_iter = 50);

struct RealRefinement {
  ChartPoint<double> point;
  double residual;
  bool converged;
};
RealRefinement refine_real(const SectionSystem<double>& sys, ChartPoint<double> pt, double tol = 1e-12, int max_iter = 50);

/// Tracks all start paths, refines, deduplicates and classifies.  Throws
/// CountMismatch when the count is not 92 after the allowed retries.
SolutionSet solve_all(const Lines8<Rational>& lines, const SolverOptions& opts = {});

/// Sum of local indices over a complete solution set, as a form over R.
GwForm assemble_enriched_count(const SolutionSet& set);

ChartPoint<Complex> conjugate(const ChartPoint<Complex>& pt);

/// Endpoint of a solution expressed in another chart (complex transition).
ChartPoint<Complex> to_chart(const ChartPoint<Complex>& pt, const Chart& target);

}  // namespace conics
