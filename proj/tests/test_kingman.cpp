#include <doctest.h>

#include <cmath>

#include "hoc/checks.hpp"
#include "hoc/iteration.hpp"
#include "hoc/kingman.hpp"

using namespace hoc;

namespace {

// composite Simpson for b int theta q(x) / (theta - (1-b) x) dx with a polynomial density
template <class Dens>
real interior_lhs(Dens dens, real b, real theta, real s = 1, int m = 20000) {
  real hstep = s / m, acc = 0;
  for (int i = 0; i <= m; ++i) {
    real x = i * hstep;
    real w = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
    acc += w * dens(x) * theta / (theta - (1 - b) * x);
  }
  return b * acc * hstep / 3;
}

}  // namespace

TEST_CASE("uniform theta: parametrization identity") {
  auto q = make_measure("uniform");
  for (int i = 1; i <= 9; ++i) {
    real t = i / 10.0L;
    real b = uniform_b_of_t(t);
    real th = solve_theta(*q, b);
    CHECK(std::fabs(th - uniform_theta_of_t(t)) < 1e-10L);
    // closed form of the interior equation for the uniform density
    real lhs = b * th / (1 - b) * -std::log1p(-(1 - b) / th);
    CHECK(std::fabs(lhs - 1) < 1e-10L);
  }
  CHECK(check_theta_identity(1e-10L).passed);
}

TEST_CASE("interior root against Simpson quadrature, beta(2,3)") {
  auto q = make_measure("beta a=2 b=3");
  auto dens = [](real x) { return 12 * x * (1 - x) * (1 - x); };
  // int Q/(1-x) = 2, so the interior branch needs b > 1/2
  CHECK_THROWS_AS(solve_theta(*q, 0.45L), wrong_branch);
  for (real b : {0.55L, 0.7L, 0.9L}) {
    real th = solve_theta(*q, b);
    CHECK(th > 1 - b);
    CHECK(th < 1);
    CHECK(std::fabs(interior_lhs(dens, b, th) - 1) < 1e-9L);
  }
}

TEST_CASE("threshold integral") {
  CHECK(std::isinf(threshold_integral(*make_measure("uniform"), 1)));
  CHECK(std::fabs(threshold_integral(*make_measure("poly_decay p=2"), 1) - 1.5L) < 1e-15L);
  CHECK(std::fabs(threshold_integral(*make_measure("uniform"), 2) - 2 * std::log(2.0L)) < 1e-15L);
  auto a = moment_sequence::atomic({{0.2L, 0.5L}, {0.6L, 0.5L}});
  CHECK(std::fabs(threshold_integral(a, 1) - (0.5L / 0.8L + 0.5L / 0.4L)) < 1e-16L);
  CHECK_THROWS_AS(threshold_integral(a, 0.5L), precondition_error);
}

TEST_CASE("condensed branch: 3(1-x)^2 at b = 1/2 has condensate 1/4") {
  auto q = make_measure("poly_decay p=2");
  auto eq = solve_kingman(q, 0.5L, 1);
  CHECK(eq.branch == kingman_branch::condensed);
  CHECK(std::fabs(eq.condensate - 0.25L) < 1e-15L);
  CHECK(std::fabs(kingman_condensate(*q, 0.5L) - 0.25L) < 1e-15L);
  CHECK_THROWS_AS(solve_theta(*q, 0.5L, 1), wrong_branch);
  CHECK(std::fabs(gamma_L_bar(*q, 0.5L) - 1) < 1e-15L);
  // int y K(dy) = K + b int x Q/(1-x) = 1/4 + 1/2 * 3 int x (1-x) dx = 1/2
  CHECK(std::fabs(eq.moment(1) - 0.5L) < 1e-15L);
  CHECK(std::fabs(kingman_first_moment(*q, 0.5L) - 0.5L) < 1e-15L);
  // the threshold b = 2/3 separates the branches
  CHECK(solve_kingman(q, 0.7L, 1).branch == kingman_branch::interior);
  CHECK(solve_kingman(q, 0.6L, 1).branch == kingman_branch::condensed);
}

TEST_CASE("gamma L bar and fixed points") {
  auto q = make_measure("uniform");
  for (real b : {0.1L, 0.5L, 0.9L}) {
    real th = solve_theta(*q, b);
    CHECK(std::fabs(gamma_L_bar(*q, b) - (1 - b) / th) < 1e-15L);
    CHECK(std::fabs(kingman_first_moment(*q, b) - th) < 1e-15L);
    auto eq = solve_kingman(q, b);
    real m1 = eq.moment(1);
    for (int k = 1; k <= 5; ++k)
      CHECK(std::fabs((1 - b) * eq.moment(k + 1) / m1 + b * q->moment(k) - eq.moment(k)) < 1e-11L);
  }
  auto fp = check_kingman_fixed_points(1e-10L);
  INFO(fp.detail);
  CHECK(fp.passed);
  CHECK_THROWS_AS(gamma_L_bar(*q, 1), config_error);
}

TEST_CASE("atomic equilibrium is a fixed point in total variation") {
  auto q = share(moment_sequence::atomic({{0.3L, 0.5L}, {0.9L, 0.5L}}));
  for (real h : {0.9L, 1.0L}) {
    for (real b : {0.1L, 0.6L}) {
      auto eq = solve_kingman(q, b, h);
      atomic_measure a = eq.to_atomic();
      CHECK(std::fabs(a.total_mass() - 1) < 1e-15L);
      CHECK(tv_distance(atomic_step(a, b, to_atomic(*q)), a) < 1e-12L);
    }
  }
}

TEST_CASE("curvature: value at t = 1/2 and the second derivative against finite differences") {
  CHECK(std::fabs(curvature_numerator(0.5L) / -4.1848e-4L - 1) < 1.2e-4L);
  auto q = make_measure("uniform");
  for (real t : {0.2L, 0.5L, 0.8L}) {
    real b = uniform_b_of_t(t), h = 1e-3L;
    real fd = (solve_theta(*q, b + h, -1, 1e-18L) - 2 * solve_theta(*q, b, -1, 1e-18L) +
               solve_theta(*q, b - h, -1, 1e-18L)) / (h * h);
    CHECK(std::fabs(theta_second_derivative(t) - fd) < 1e-3L * std::fabs(fd) + 1e-6L);
  }
}

TEST_CASE("property: theta is convex in b for uniform Q") {
  std::vector<real> grid;
  for (int i = 1; i < 100; ++i) grid.push_back(i / 100.0L);
  curvature_scan sc = theta_curvature_scan(grid);
  CHECK(sc.sign_changes == 0);
  CHECK(sc.has_positive_curvature);
  CHECK_FALSE(sc.has_negative_curvature);
  for (auto& p : sc.points) {
    CHECK(p.numerator < 0);
    CHECK(p.d2theta > 0);
  }
  CHECK_THROWS_AS(theta_curvature_scan({0.5L, 1.0L}), config_error);
}

TEST_CASE("single atom: theta equals the atom and the condensate grows with h") {
  auto q = make_measure("atomic [(0.6,1)]");
  auto eq = solve_kingman(q, 0.3L, 0.6L);
  CHECK(eq.branch == kingman_branch::interior);
  CHECK(std::fabs(eq.theta - 0.6L) < 1e-12L);
  auto hi = solve_kingman(q, 0.3L, 0.9L);
  CHECK(hi.branch == kingman_branch::condensed);
  CHECK(std::fabs(hi.condensate - (1 - 0.3L / (1 - 0.6L / 0.9L))) < 1e-15L);
}
