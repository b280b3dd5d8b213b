#pragma once

// JSON serialization.  Line files look like
//
//   {"lines": [{"p": ["1", "0", "-2/3", "4"], "s": [...]}, ... 8 entries],
//    "kind": "planted", "seed": 7,
//    "planted": {"chart": [0, 0], "a": [...3], "b": [...5]}}
//
// Coordinates are either all rational strings or all JSON numbers; numbers
// are converted to the exact rational value of the double.

#include <json.hpp>

#include <stdexcept>
#include <string>

#include "conics/bruteforce.hpp"
#include "conics/instance.hpp"
#include "conics/solver.hpp"
#include "conics/verify.hpp"

namespace conics {

using json = nlohmann::json;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Instance instance_from_json(const json& j);
json instance_to_json(const Instance& inst);
Instance load_instance(const std::string& path);
void save_json(const json& j, const std::string& path);

json to_json(const Complex& z);  // [re, im]
json to_json(const Fp& x);       // {"p": 5, "v": 3}
json to_json(const Fp2& x);      // {"p": 3, "c": [c0, c1]}
json to_json(const GwForm& f);
json to_json(const ChartPoint<Complex>& pt);
/// Every solution, conjugate partners included, so the array has 92 entries.
json to_json(const SolutionSet& set);
json to_json(const VerificationReport& rep);
json to_json(const BruteForceResult<Fp>& r);
json to_json(const BruteForceResult<Fp2>& r);

}  // namespace conics
