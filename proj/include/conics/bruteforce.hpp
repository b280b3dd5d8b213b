#pragma once

// Exhaustive search for zeros of the section over F_q, q = p or p^2.
//
// A point of the conic moduli space is a plane A in P^3 together with a conic
// B in P^5, where B is written in the plane coordinates that drop A's first
// nonzero coefficient.  Enumerating normalized representatives of both visits
// every point exactly once, with no chart boundary to fall off.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "conics/gw.hpp"
#include "conics/section.hpp"

namespace conics {

class TooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class T>
struct ChartIndexRecord {
  Chart chart;
  ChartPoint<T> point;
  T determinant;
  T oriented;
};

template <class T>
struct FqSolution {
  Plane3<T> plane;        // first nonzero coefficient is 1
  int plane_chart = 0;    // index of that coefficient
  ConicCoeffs<T> conic;   // in plane_chart's plane coordinates, first nonzero coefficient 1
  bool over_base_field = true;
  std::vector<ChartIndexRecord<T>> charts;  // every chart containing the point

  bool singular() const;
};

template <class T>
struct BruteForceResult {
  std::uint64_t p = 0;
  int degree = 1;
  std::size_t candidates = 0;
  /// (candidate, chart) pairs at which Phi was evaluated and compared with the oracle.
  std::size_t chart_evaluations = 0;
  std::size_t discrepancies = 0;
  std::vector<FqSolution<T>> solutions;
};

struct BruteForceOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  /// Compare Phi with the incidence oracle at every candidate in every chart
  /// containing it.  When false (and always over F_{p^2}) the comparison runs
  /// only at the solutions the oracle finds.
  bool cross_check = true;
};

/// Degree 1: points over F_p.  Requires p odd prime, p <= 9.
BruteForceResult<Fp> brute_force_fq(const Lines8<Fp>& lines, const BruteForceOptions& opts = {});
/// Degree 2: points over F_{p^2} = F_p[t]/(t^2 - n), n the least nonresidue.  Requires p^2 <= 9.
BruteForceResult<Fp2> brute_force_fq2(const Lines8<Fp>& lines, const BruteForceOptions& opts = {});

/// Ratios of oriented determinants between any two charts containing the
/// solution are nonzero squares.  False for singular solutions.
template <class T>
bool chart_compatible(const FqSolution<T>& s);

/// <det> over F_p for a rational point; Tr<det> for a point of F_{p^2} \ F_p.
GwForm fq_local_index(const FqSolution<Fp>& s);
GwForm fq_local_index(const FqSolution<Fp2>& s);

/// Position of the solution equal to `pt` (compared projectively), if any.
template <class T>
std::optional<std::size_t> find_solution(const BruteForceResult<T>& result, const ChartPoint<T>& pt);

Lines8<Fp2> embed_lines(const Lines8<Fp>& lines);
ChartPoint<Fp2> embed_point(const ChartPoint<Fp>& pt);

}  // namespace conics
