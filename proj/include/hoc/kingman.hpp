#pragma once

#include <string>
#include <vector>

#include "hoc/measure.hpp"

namespace hoc {

// int Q(dx) / (1 - x/h); +inf when divergent. Requires h >= S_Q.
real threshold_integral(const moment_sequence& q, real h);

// Root of int b theta Q(dx) / (theta - (1-b) x) = 1 on [(1-b)h, S_Q]. Bisection.
// Throws wrong_branch when b * threshold_integral(q, h) < 1.
real solve_theta(const moment_sequence& q, real b, real h = -1, real root_tol = 1e-12L);

enum class kingman_branch { interior, condensed };

struct kingman_equilibrium {
  kingman_branch branch = kingman_branch::interior;
  real b = 0, h = 1;
  real theta = 0;       // interior branch
  real condensate = 0;  // condensed branch, mass at h
  real threshold = 0;   // int Q/(1 - x/h)
  measure_ptr q;

  // Radon-Nikodym factor of the continuous part against Q
  std::string density_factor() const;
  real moment(int k) const;
  // exact representation for atomic Q
  atomic_measure to_atomic() const;
};

kingman_equilibrium solve_kingman(measure_ptr q, real b, real h = -1);

// (1-b)/theta_b in the interior regime, 1/S_Q otherwise (decided at h = S_Q).
real gamma_L_bar(const moment_sequence& q, real b);
// int y K_Q(dy) at h = S_Q; equals (1-b) / gamma_L_bar
real kingman_first_moment(const moment_sequence& q, real b);
// condensate size K_Q at h = S_Q
real kingman_condensate(const moment_sequence& q, real b);

// ---------------------------------------------------------------- uniform-Q curvature

// Closed-form parametrization of the uniform case by t in (0,1).
real uniform_b_of_t(real t);
real uniform_theta_of_t(real t);
// m'(t) n(t) - m(t) n'(t), with d theta/db = m/n
real curvature_numerator(real t);
// d^2 theta_b / db^2 along the parametrization
real theta_second_derivative(real t);

struct curvature_point {
  real t, b, theta, numerator, d2theta;
};

struct curvature_scan {
  std::vector<curvature_point> points;
  int sign_changes = 0;
  bool has_positive_curvature = false;
  bool has_negative_curvature = false;
};

curvature_scan theta_curvature_scan(const std::vector<real>& t_grid);

}  // namespace hoc
