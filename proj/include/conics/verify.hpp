#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conics/instance.hpp"
#include "conics/solver.hpp"

namespace conics {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerificationReport {
  std::size_t count = 0;
  std::size_t real = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  GwForm gw{FieldTag::real()};
  Verdict verdict = Verdict::Undecided;
  std::vector<Check> checks;
  std::optional<SolutionSet> solutions;  // absent when the solver threw

  bool passed() const;
};

struct VerifyOptions {
  SolverOptions solver;
  /// Real solutions and pairs (each) on which the section-level checks run.
  int samples = 4;
  /// Re-solve with lines 0 and 1 swapped and expect the signs to trade places.
  bool permutation = true;
};

VerificationReport verify(const Instance& inst, const VerifyOptions& opts = {});

/// Lines with L_a and L_b exchanged.
Lines8<Rational> swap_lines(const Lines8<Rational>& lines, int a, int b);

}  // namespace conics
