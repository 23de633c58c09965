#include "hoc/kingman.hpp"

#include <cmath>

#include "hoc/format.hpp"

namespace hoc {

real threshold_integral(const moment_sequence& q, real h) {
  if (!(h >= q.s_q())) throw precondition_error("h must satisfy h >= S_Q");
  return q.resolvent(0, q.s_q() / h);
}

real solve_theta(const moment_sequence& q, real b, real h, real root_tol) {
  if (!(b > 0 && b < 1)) throw config_error("b must lie in (0,1)");
  real s = q.s_q();
  if (h < 0) h = s;
  if (!(h >= s)) throw precondition_error("h must satisfy h >= S_Q");
  real z_top = s / h;
  real top = b * q.resolvent(0, z_top);
  if (top < 1) throw wrong_branch("condensed regime: int Q/(1-x/h) < 1/b, theta_b does not exist");
  if (q.kind() == family::atomic && q.atoms().size() == 1) return s;

  // In z = (1-b) S_Q / theta the equation reads b J_0(z) = 1, J_0 increasing.
  real lo = 1 - b, hi = z_top;
  for (int it = 0; it < 256 && hi - lo > 4 * real_eps * hi; ++it) {
    real mid = (lo + hi) / 2;
    if (b * q.resolvent(0, mid) < 1)
      lo = mid;
    else
      hi = mid;
  }
  real z = (lo + hi) / 2;
  real resid = std::fabs(b * q.resolvent(0, z) - 1);
  // near z = 1 the slope of F is ~ b/(1-z); a bracket at eps resolution is as good as it gets
  bool collapsed = hi - lo <= 4 * real_eps * hi && b * q.resolvent(0, lo) <= 1 && b * q.resolvent(0, hi) >= 1;
  if (!(resid < root_tol) && !collapsed) {
    throw numeric_error("theta root not resolved: |F - 1| = " + format_real(resid) + " at z = " + format_real(z));
  }
  return (1 - b) * s / z;
}

std::string kingman_equilibrium::density_factor() const {
  if (branch == kingman_branch::interior)
    return "b*theta/(theta-(1-b)*x) with b=" + format_real(b) + " theta=" + format_real(theta);
  return "b/(1-x/h) with b=" + format_real(b) + " h=" + format_real(h);
}

real kingman_equilibrium::moment(int k) const {
  real s = q->s_q();
  real sk = std::pow(s, static_cast<real>(k));
  if (branch == kingman_branch::interior) return b * sk * q->resolvent(k, (1 - b) * s / theta);
  return b * sk * q->resolvent(k, s / h) + condensate * std::pow(h, static_cast<real>(k));
}

atomic_measure kingman_equilibrium::to_atomic() const {
  atomic_measure a = hoc::to_atomic(*q);
  for (size_t i = 0; i < a.x.size(); ++i) {
    if (branch == kingman_branch::interior)
      a.w[i] *= b * theta / (theta - (1 - b) * a.x[i]);
    else
      a.w[i] *= b / (1 - a.x[i] / h);
  }
  if (branch == kingman_branch::condensed && condensate > 0) {
    a.x.push_back(h);
    a.w.push_back(condensate);
  }
  return a;
}

kingman_equilibrium solve_kingman(measure_ptr q, real b, real h) {
  if (!(b > 0 && b < 1)) throw config_error("b must lie in (0,1)");
  if (h < 0) h = q->s_q();
  kingman_equilibrium eq;
  eq.b = b;
  eq.h = h;
  eq.q = q;
  eq.threshold = threshold_integral(*q, h);
  if (eq.threshold >= 1 / b) {
    eq.branch = kingman_branch::interior;
    eq.theta = solve_theta(*q, b, h);
  } else {
    eq.branch = kingman_branch::condensed;
    eq.condensate = 1 - b * eq.threshold;
  }
  return eq;
}

real gamma_L_bar(const moment_sequence& q, real b) {
  if (!(b > 0 && b < 1)) throw config_error("b must lie in (0,1)");
  real thr = threshold_integral(q, q.s_q());
  if (b * thr > 1) return (1 - b) / solve_theta(q, b);
  return 1 / q.s_q();
}

real kingman_first_moment(const moment_sequence& q, real b) { return (1 - b) / gamma_L_bar(q, b); }

real kingman_condensate(const moment_sequence& q, real b) {
  real thr = threshold_integral(q, q.s_q());
  return b * thr >= 1 ? 0 : 1 - b * thr;
}

// ---------------------------------------------------------------- uniform-Q curvature

real uniform_b_of_t(real t) { return -t / std::log1p(-t); }

real uniform_theta_of_t(real t) { return 1 / t + 1 / std::log1p(-t); }

real curvature_numerator(real t) {
  real l = std::log1p(-t);
  real u = 1 - t;
  return -2 * t * u * u * l * l * l + (-4 * t * t + 3 * t * t * t) * l * l - t * t * t * (2 + t) * l;
}

real theta_second_derivative(real t) {
  real l = std::log1p(-t);
  real n = -(1 - t) * t * t * l - t * t * t;
  real db_dt = -(l + t / (1 - t)) / (l * l);
  return curvature_numerator(t) / (n * n * db_dt);
}

curvature_scan theta_curvature_scan(const std::vector<real>& t_grid) {
  curvature_scan scan;
  int prev_sign = 0;
  for (real t : t_grid) {
    if (!(t > 0 && t < 1)) throw config_error("curvature grid points must lie in (0,1)");
    curvature_point p{t, uniform_b_of_t(t), uniform_theta_of_t(t), curvature_numerator(t), theta_second_derivative(t)};
    int sign = p.numerator > 0 ? 1 : (p.numerator < 0 ? -1 : 0);
    if (sign != 0 && prev_sign != 0 && sign != prev_sign) ++scan.sign_changes;
    if (sign != 0) prev_sign = sign;
    if (p.d2theta > 0) scan.has_positive_curvature = true;
    if (p.d2theta < 0) scan.has_negative_curvature = true;
    scan.points.push_back(p);
  }
  return scan;
}

}  // namespace hoc
