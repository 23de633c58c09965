#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hoc/core.hpp"

namespace hoc::detail {

// stream tags; the first-model tag is shared by every estimator that draws an i.i.d. path
inline constexpr std::uint64_t tag_path = 0x1001;
inline constexpr std::uint64_t tag_shared = 0x2002;
inline constexpr std::uint64_t tag_xi = 0x3003;

struct mean_se {
  real mean = 0;
  real se = 0;
};

// ordered summation, so the result does not depend on who filled the slots
inline mean_se summarize(const std::vector<real>& v) {
  mean_se r;
  if (v.empty()) return r;
  real s = 0;
  for (real x : v) s += x;
  r.mean = s / v.size();
  if (v.size() < 2) return r;
  real q = 0;
  for (real x : v) q += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(q / (v.size() - 1) / v.size());
  return r;
}

inline real mean_of(const std::vector<real>& v) { return summarize(v).mean; }

}  // namespace hoc::detail
