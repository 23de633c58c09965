#include "hoc/quadrature.hpp"

#include <cmath>

namespace hoc {

namespace {

constexpr real half_pi = 1.5707963267948966192313216916397514L;
constexpr real t_max = 5.0L;

// contribution of nodes t and -t
real node_pair(const std::function<real(real, real)>& f, real t) {
  real s = half_pi * std::sinh(t);
  real e = std::exp(-2 * s);
  real small = e / (1 + e);
  real big = 1 / (1 + e);
  real w = 2 * half_pi * std::cosh(t) * e / ((1 + e) * (1 + e));
  if (w == 0) return 0;
  real v = f(big, small);
  if (t != 0) v += f(small, big);
  return w * v;
}

}  // namespace

real tanh_sinh(const std::function<real(real, real)>& f, real rel_tol, int max_level) {
  real h = 1;
  real sum = 0;
  for (real t = 0; t <= t_max; t += 1) sum += node_pair(f, t);
  real prev = h * sum;
  for (int level = 1; level <= max_level; ++level) {
    h /= 2;
    for (real t = h; t <= t_max; t += 2 * h) sum += node_pair(f, t);
    real cur = h * sum;
    if (level >= 4 && std::fabs(cur - prev) <= rel_tol * std::fabs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace hoc
