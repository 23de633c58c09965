#pragma once

#include <cstdint>
#include <string>

#include "hoc/measure.hpp"

namespace hoc {

struct check_result {
  std::string name;
  bool passed = true;
  int cases = 0;
  int failures = 0;
  real worst = 0;      // largest observed error (or smallest margin, see detail)
  real tolerance = 0;
  std::string detail;
};

// solve_theta at b(t) against 1/t + 1/ln(1-t), t = 0.1..0.9, uniform Q
check_result check_theta_identity(real tol);
// curvature numerator at t = 0.5 against -4.1848e-4, relative tolerance
check_result check_curvature_value(real rel_tol);
// curvature numerator against 5 t^6 for t <= 0.02, relative tolerance
check_result check_curvature_small_t(real rel_tol);

// Ratio recursion against the type-(*) path expansion (L_{j,n}, R^n_{j,k}, ln Psi_n) and
// the path expansion against elimination, on random atomic / uniform instances with n <= 8.
check_result check_oracle_equivalence(int configs, std::uint64_t seed, real rel_ratio, real rel_elim);

// Monotonicity of R^n_{j,k} and gamma_j L_{j,n} in n, the limit envelope for gamma L and R,
// and the finite-k identity 1 = prod g * r_{k+1,k} + sum_{i<k} Phi_{1,i}. n <= 24, k <= 16.
check_result check_monotonicity(int paths, std::uint64_t seed, real identity_tol);

// derivative_checks on random small instances
check_result check_derivatives(int instances, std::uint64_t seed);

// Mixture iteration against pointwise iteration on random atomic Q (<= 10 atoms, path <= 15).
check_result check_mixture_vs_atomic(int instances, std::uint64_t seed, real tol);

// Interior and condensed Kingman equilibria are fixed by one step (atomic Q: TV; parametric Q:
// moments), and 3(1-x)^2, b = 0.5, h = 1 has condensate 0.25.
check_result check_kingman_fixed_points(real tol);

// Moment sequence sanity: m_0 = 1, decrease, strict ratio chain up to K.
check_result check_holder(const moment_sequence& q, int K);

}  // namespace hoc
