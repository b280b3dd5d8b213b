#include "conics/geometry.hpp"

namespace conics {

std::vector<Chart> all_charts() {
  std::vector<Chart> out;
  out.reserve(24);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 6; ++j) out.emplace_back(i, j);
  return out;
}

}  // namespace conics
