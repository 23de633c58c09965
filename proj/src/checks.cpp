#include "hoc/checks.hpp"

#include <algorithm>
#include <cmath>

#include "hoc/format.hpp"
#include "hoc/iteration.hpp"
#include "hoc/kingman.hpp"
#include "hoc/random_models.hpp"
#include "hoc/ratio_kernel.hpp"

namespace hoc {

namespace {

struct draw {
  rng_stream r;
  draw(std::uint64_t seed, std::uint64_t tag, std::uint64_t i) : r(seed, tag, i) {}
  real u() { return r.uniform(); }
  int range(int lo, int hi) { return std::min(hi, lo + static_cast<int>(u() * (hi - lo + 1))); }
};

moment_sequence random_atomic(draw& d, int max_atoms) {
  int k = d.range(2, max_atoms);
  std::vector<atom> pts;
  real tot = 0;
  for (int i = 0; i < k; ++i) {
    pts.push_back({0.05L + 0.95L * d.u(), 0.1L + d.u()});
    tot += pts.back().w;
  }
  for (auto& p : pts) p.w /= tot;
  return moment_sequence::atomic(pts);
}

moment_sequence random_q(draw& d, bool atomic) {
  if (atomic) return random_atomic(d, 10);
  return moment_sequence::uniform(0.5L + 0.5L * d.u());
}

std::vector<real> random_b(draw& d, int n, real lo, real hi, real p_zero) {
  std::vector<real> b(n);
  for (auto& v : b) v = (p_zero > 0 && d.u() < p_zero) ? 0 : lo + (hi - lo) * d.u();
  return b;
}

real rel_err(real a, real ref) { return std::fabs(a - ref) / std::max(std::fabs(ref), real(1e-300L)); }

void finish(check_result& r) { r.passed = r.failures == 0; }

check_result named(std::string name) {
  check_result r;
  r.name = std::move(name);
  return r;
}

}  // namespace

check_result check_theta_identity(real tol) {
  check_result r = named("theta_identity");
  r.tolerance = tol;
  moment_sequence q = moment_sequence::uniform();
  for (int i = 1; i <= 9; ++i) {
    real t = i / 10.0L;
    real th = solve_theta(q, uniform_b_of_t(t));
    real err = std::fabs(th - uniform_theta_of_t(t));
    r.worst = std::max(r.worst, err);
    ++r.cases;
    if (!(err <= tol)) ++r.failures;
  }
  finish(r);
  r.detail = "max |theta - (1/t + 1/ln(1-t))| over t = 0.1..0.9";
  return r;
}

check_result check_curvature_value(real rel_tol) {
  check_result r = named("curvature_value");
  r.tolerance = rel_tol;
  const real ref = -4.1848e-4L;
  real v = curvature_numerator(0.5L);
  r.worst = rel_err(v, ref);
  r.cases = 1;
  r.failures = r.worst <= rel_tol ? 0 : 1;
  finish(r);
  r.detail = "numerator(0.5) = " + format_real(v);
  return r;
}

check_result check_curvature_small_t(real rel_tol) {
  check_result r = named("curvature_small_t");
  r.tolerance = rel_tol;
  for (real t : {0.005L, 0.01L, 0.015L, 0.02L}) {
    real v = curvature_numerator(t);
    real e = rel_err(v, 5 * std::pow(t, 6));
    r.worst = std::max(r.worst, e);
    ++r.cases;
    if (!(e <= rel_tol)) ++r.failures;
    if (t == 0.01L) r.detail = "numerator(0.01) = " + format_real(v) + ", 5t^6 = " + format_real(5 * std::pow(t, 6));
  }
  finish(r);
  return r;
}

check_result check_oracle_equivalence(int configs, std::uint64_t seed, real rel_ratio, real rel_elim) {
  check_result r = named("oracle_equivalence");
  r.tolerance = rel_ratio;
  real worst_elim = 0;
  int elim_fail = 0;
  for (int c = 0; c < configs; ++c) {
    draw d(seed, 0xc3, c);
    moment_sequence q = random_q(d, c % 2 == 0);
    int n = d.range(1, 8);
    mutation_path path(random_b(d, n, 0.05L, 0.95L, 0));
    ratio_state st = ratio_table(q, path, 3, terminal_kind::q);
    std::vector<real> gam = gammas(path);
    bool bad = false;
    for (int j = 1; j <= n + 1; ++j) {
      typestar_matrix w = w_matrix(q, gam, j, n);
      real dw = typestar_det(w);
      real de = elimination_det(w);
      real ee = rel_err(de, dw);
      worst_elim = std::max(worst_elim, ee);
      if (!(ee <= rel_elim)) ++elim_fail, bad = true;
      if (j <= n) {
        real l = typestar_det(w_matrix(q, gam, j + 1, n)) / dw;
        real e = rel_err(st.L(j), l);
        r.worst = std::max(r.worst, e);
        if (!(e <= rel_ratio)) bad = true;
      }
      for (int k = 1; k <= 3; ++k) {
        typestar_matrix u = u_matrix(q, gam, j, n, k);
        real du = typestar_det(u);
        real eu = rel_err(elimination_det(u), du);
        worst_elim = std::max(worst_elim, eu);
        if (!(eu <= rel_elim)) ++elim_fail, bad = true;
        real e = rel_err(st.R(j, k), du / dw);
        r.worst = std::max(r.worst, e);
        if (!(e <= rel_ratio)) bad = true;
      }
    }
    real lp = 0;
    for (real g : gam) lp += std::log(g);
    lp -= std::log(typestar_det(w_matrix(q, gam, 1, n)));
    real e = std::fabs(log_psi(q, path) - lp) / std::max(real(1), std::fabs(lp));
    r.worst = std::max(r.worst, e);
    if (!(e <= rel_ratio)) bad = true;
    ++r.cases;
    if (bad) ++r.failures;
  }
  finish(r);
  r.detail = "max elimination vs path-expansion error " + format_real(worst_elim) + " (tol " + format_real(rel_elim) +
             ", " + std::to_string(elim_fail) + " over)";
  return r;
}

check_result check_monotonicity(int paths, std::uint64_t seed, real identity_tol) {
  check_result r = named("monotonicity_bounds");
  r.tolerance = identity_tol;
  int ties = 0, unconverged = 0;
  std::string first_fail;
  for (int p = 0; p < paths; ++p) {
    draw d(seed, 0xa4, p);
    moment_sequence q = random_q(d, p % 2 == 0);
    int n = d.range(2, 23);
    int k = d.range(1, 16);
    std::vector<real> bs = random_b(d, n + 1, 0.05L, 0.95L, 0.05L);
    mutation_path full(bs);
    mutation_path part = full.prefix(n);
    bool bad = false;
    auto fail = [&](const std::string& what) {
      bad = true;
      if (first_fail.empty()) first_fail = "path " + std::to_string(p) + ": " + what;
    };
    for (terminal_kind term : {terminal_kind::q, terminal_kind::delta}) {
      ratio_state t0 = ratio_table(q, part, k, term);
      ratio_state t1 = ratio_table(q, full, k, term);
      if (term == terminal_kind::q) {
        // R increases and gamma L decreases with n
        for (int j = 1; j <= n + 1; ++j) {
          for (int kk = 1; kk <= k; ++kk) {
            real a = t0.r(j, kk), b = t1.r(j, kk);
            if (b < a * (1 - 8 * real_eps)) fail("R decreases in n at j=" + std::to_string(j));
            if (b <= a) ++ties;
          }
          if (j <= n) {
            if (t1.g(j) > t0.g(j) * (1 + 8 * real_eps)) fail("gamma L increases in n at j=" + std::to_string(j));
            if (t1.g(j) >= t0.g(j)) ++ties;
          }
        }
      }
      // 1 = prod_{i<k} g_{1+i} r_{k+1,k} + sum_{i<k} Phi_{1,i}, any terminal
      for (int kk = 1; kk <= std::min(k, n); ++kk) {
        real prod = 1, sum = 0;
        for (int i = 0; i < kk; ++i) {
          sum += t1.phi(1, i);
          prod *= t1.g(1 + i);
        }
        real e = std::fabs(prod * t1.r(kk + 1, kk) + sum - 1);
        r.worst = std::max(r.worst, e);
        if (!(e <= identity_tol)) fail("finite-k identity off by " + format_real(e));
      }
    }
    // envelope of the limits
    std::uint64_t tail_tag = 0xa5 + static_cast<std::uint64_t>(p);
    auto b_of = [&](int j) -> real {
      if (j <= full.size()) return full.b_at(j);
      rng_stream s(seed, tail_tag, j);
      return 0.05L + 0.9L * s.uniform();
    };
    limit_options lo;
    lo.tol = 1e-12L;
    {
      limit_result lim = limits(q, b_of, lo);
      if (!lim.converged) ++unconverged;
      real s = q.s_q(), mu1 = q.mu(1);
      odds g = odds::from_b(full.b_at(1));
      real lo_b = g.infinite ? 1 : g.value / (mu1 + g.value);
      real hi_b = g.infinite ? 1 / mu1 : g.value / (mu1 * (1 + g.value));
      if (!(lo_b < s * lim.gl_lower && s * lim.gl_upper < hi_b)) fail("gamma L outside its envelope");
      if (!(mu1 < lim.r_lower[1] / s && lim.r_upper[1] / s < 1)) fail("R outside (m_1, 1)");
      if (lim.inverted) fail("brackets inverted");
    }
    ++r.cases;
    if (bad) ++r.failures;
  }
  finish(r);
  r.detail = std::to_string(ties) + " rounding-level ties, " + std::to_string(unconverged) + " unconverged limits";
  if (!first_fail.empty()) r.detail += "; first failure " + first_fail;
  return r;
}

check_result check_derivatives(int instances, std::uint64_t seed) {
  check_result r = named("derivative_checks");
  r.tolerance = 10;
  r.worst = real_inf;
  std::string first_fail;
  int total = 0;
  for (int i = 0; i < instances; ++i) {
    draw d(seed, 0xd5, i);
    moment_sequence q = random_q(d, i % 2 == 0);
    int n = d.range(1, 6);
    int k = d.range(1, 4);
    mutation_path path(random_b(d, n, 0.15L, 0.85L, 0));
    derivative_report rep = derivative_checks(q, path, k);
    for (auto& c : rep.checks) {
      ++total;
      if (!c.passed && first_fail.empty())
        first_fail = "instance " + std::to_string(i) + " " + c.name + "(" + std::to_string(c.i) + "," +
                     std::to_string(c.j) + ") margin " + format_real(c.margin) + " fd error " + format_real(c.fd_error);
    }
    r.worst = std::min(r.worst, rep.min_ratio);
    ++r.cases;
    if (!rep.all_passed) ++r.failures;
  }
  finish(r);
  r.detail = std::to_string(total) + " checks; worst margin / fd error = " + format_real(r.worst);
  if (!first_fail.empty()) r.detail += "; first failure " + first_fail;
  return r;
}

check_result check_mixture_vs_atomic(int instances, std::uint64_t seed, real tol) {
  check_result r = named("mixture_vs_atomic");
  r.tolerance = tol;
  for (int i = 0; i < instances; ++i) {
    draw d(seed, 0xe6, i);
    measure_ptr q = share(random_atomic(d, 10));
    int n = d.range(1, 15);
    mutation_path path(random_b(d, n, 0.02L, 0.95L, 0.1L));
    mixture_measure p0;
    p0.basis = q;
    p0.h = d.u() < 0.5L ? q->s_q() : q->s_q() + (1 - q->s_q()) * d.u();
    int L = d.range(0, 3);
    real tot = 0;
    p0.coeffs.assign(L + 1, 0);
    for (auto& c : p0.coeffs) tot += (c = d.u());
    p0.condensate = d.u() < 0.5L ? d.u() : 0;
    tot += p0.condensate;
    for (auto& c : p0.coeffs) c /= tot;
    p0.condensate /= tot;
    mixture_measure pn = forward_sequence(path, p0).back();
    atomic_measure ref = atomic_iterate(to_atomic(p0), path, *q);
    real e = tv_distance(to_atomic(pn), ref);
    r.worst = std::max(r.worst, e);
    ++r.cases;
    if (!(e < tol)) ++r.failures;
  }
  finish(r);
  r.detail = "max total variation distance";
  return r;
}

check_result check_kingman_fixed_points(real tol) {
  check_result r = named("kingman_fixed_points");
  r.tolerance = tol;
  std::string msg;
  auto atomic_case = [&](std::vector<atom> pts, real b, real h, kingman_branch want) {
    measure_ptr q = share(moment_sequence::atomic(pts));
    kingman_equilibrium eq = solve_kingman(q, b, h);
    atomic_measure a = eq.to_atomic();
    real e = tv_distance(atomic_step(a, b, to_atomic(*q)), a);
    r.worst = std::max(r.worst, e);
    ++r.cases;
    if (!(e < tol) || eq.branch != want) ++r.failures;
  };
  atomic_case({{0.2L, 0.3L}, {0.5L, 0.3L}, {1, 0.4L}}, 0.3L, -1, kingman_branch::interior);
  atomic_case({{0.2L, 0.5L}, {0.6L, 0.5L}}, 0.3L, 1, kingman_branch::condensed);
  atomic_case({{0.2L, 0.5L}, {0.6L, 0.5L}}, 0.7L, 1, kingman_branch::interior);
  atomic_case({{0.1L, 0.25L}, {0.4L, 0.25L}, {0.7L, 0.5L}}, 0.05L, 0.9L, kingman_branch::condensed);

  // parametric Q: the moment map M_k -> (1-b) M_{k+1}/M_1 + b m_k fixes the equilibrium moments
  auto moment_case = [&](const std::string& spec, real b, real h) {
    measure_ptr q = make_measure(spec);
    kingman_equilibrium eq = solve_kingman(q, b, h);
    real m1 = eq.moment(1);
    for (int k = 1; k <= 4; ++k) {
      real next = (1 - b) * eq.moment(k + 1) / m1 + b * q->moment(k);
      real e = std::fabs(next - eq.moment(k));
      r.worst = std::max(r.worst, e);
      if (!(e < tol)) ++r.failures;
    }
    ++r.cases;
    return eq;
  };
  moment_case("uniform", 0.5L, -1);
  kingman_equilibrium c = moment_case("poly_decay p=2", 0.5L, 1);
  real ce = std::fabs(c.condensate - 0.25L);
  r.worst = std::max(r.worst, ce);
  ++r.cases;
  if (c.branch != kingman_branch::condensed || !(ce <= tol)) ++r.failures;
  finish(r);
  r.detail = "3(1-x)^2, b=0.5, h=1 condensate " + format_real(c.condensate);
  return r;
}

check_result check_holder(const moment_sequence& q, int K) {
  check_result r = named("holder_chain");
  holder_report h = check_holder_chain(q, K);
  r.cases = 1;
  r.failures = h.ok ? 0 : 1;
  finish(r);
  r.detail = h.ok ? "chain strict up to K=" + std::to_string(K) : h.what + " at index " + std::to_string(h.index);
  return r;
}

}  // namespace hoc
