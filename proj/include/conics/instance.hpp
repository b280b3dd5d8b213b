#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "conics/section.hpp"

namespace conics {

class ExhaustedRetries : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BadPrime : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Instance {
  Lines8<Rational> lines;
  std::string kind = "file";  // "random", "planted" or "file"
  std::optional<std::uint64_t> seed;
  std::optional<ChartPoint<Rational>> planted;
};

/// Integer coordinates uniform in [-bound, bound], redrawn until the lines are
/// pairwise skew with distinct representatives.  When `reduce_prime` is given
/// the check is also required to pass after reduction mod that prime.
Instance gen_random_instance(std::uint64_t seed, int bound = 10, std::optional<std::uint64_t> reduce_prime = std::nullopt,
                             int max_retries = 10000);

/// A rational plane, a smooth conic in it given by a quadratic
/// parameterization, and 8 lines through rational points of that conic.
/// The planted solution is stored in chart (0,0) and lies in all 24 charts.
Instance gen_planted_instance(std::uint64_t seed);

Lines8<Fp> reduce_lines(const Lines8<Rational>& lines, std::uint64_t p);
ChartPoint<Fp> reduce_point(const ChartPoint<Rational>& pt, std::uint64_t p);

/// Reduction of a planted instance modulo p, rejected (BadPrime) when a
/// denominator vanishes, a line degenerates or lies in the planted plane, or
/// the planted zero becomes singular.
struct ReducedPlanted {
  Lines8<Fp> lines;
  ChartPoint<Fp> planted;
};
ReducedPlanted reduce_planted(const Instance& inst, std::uint64_t p);

/// Smallest prime >= start for which reduce_planted succeeds.
std::uint64_t first_good_prime(const Instance& inst, std::uint64_t start = 3);

/// Lines with every representative scaled to unit Euclidean norm.
Lines8<double> to_double(const Lines8<Rational>& lines, bool normalize = false);
Lines8<Complex> to_complex(const Lines8<Rational>& lines, bool normalize = false);

}  // namespace conics
