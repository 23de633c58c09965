#include <algorithm>
#include <cmath>
#include <functional>

#include "hoc/ratio_kernel.hpp"

namespace hoc {

namespace {

struct fd_value {
  real value;
  real error;
};

using scalar_fn = std::function<real(const std::vector<real>&)>;

// `round` is the absolute evaluation error of f.
fd_value first_partial(const scalar_fn& f, std::vector<real> x, int i, real h, real round) {
  auto d = [&](real hh) {
    real x0 = x[i];
    x[i] = x0 + hh;
    real fp = f(x);
    x[i] = x0 - hh;
    real fm = f(x);
    x[i] = x0;
    return (fp - fm) / (2 * hh);
  };
  real d1 = d(h), d2 = d(h / 2);
  real rich = (4 * d2 - d1) / 3;
  real rounding = (4 * round / h + round / h) / 3;
  return {rich, std::fabs(rich - d2) + rounding};
}

fd_value second_partial(const scalar_fn& f, std::vector<real> x, int i, real h, real round) {
  real f0 = f(x);
  auto d = [&](real hh) {
    real x0 = x[i];
    x[i] = x0 + hh;
    real fp = f(x);
    x[i] = x0 - hh;
    real fm = f(x);
    x[i] = x0;
    return (fp - 2 * f0 + fm) / (hh * hh);
  };
  real d1 = d(h), d2 = d(h / 2);
  real rich = (4 * d2 - d1) / 3;
  real rounding = (4 * 16 * round + 4 * round) / (3 * h * h);
  return {rich, std::fabs(rich - d2) + rounding};
}

fd_value mixed_partial(const scalar_fn& f, std::vector<real> x, int i, int j, real h, real round) {
  auto d = [&](real hh) {
    real xi = x[i], xj = x[j];
    auto at = [&](real si, real sj) {
      x[i] = xi + si * hh;
      x[j] = xj + sj * hh;
      return f(x);
    };
    real v = at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1);
    x[i] = xi;
    x[j] = xj;
    return v / (4 * hh * hh);
  };
  real d1 = d(h), d2 = d(h / 2);
  real rich = (4 * d2 - d1) / 3;
  real rounding = (4 * 4 * round + round) / (3 * h * h);
  return {rich, std::fabs(rich - d2) + rounding};
}

void record(derivative_report& rep, std::string name, int i, int j, real value, real margin, real err) {
  derivative_check c;
  c.name = std::move(name);
  c.i = i;
  c.j = j;
  c.value = value;
  c.margin = margin;
  c.fd_error = err;
  c.passed = margin > 10 * err;
  if (!c.passed) rep.all_passed = false;
  rep.min_ratio = std::min(rep.min_ratio, err > 0 ? margin / err : real_inf);
  rep.checks.push_back(std::move(c));
}

}  // namespace

derivative_report derivative_checks(const moment_sequence& q, const mutation_path& path, int k, real step) {
  int n = path.size();
  if (n < 1 || n > 10) throw precondition_error("derivative checks need 1 <= n <= 10");
  if (k < 1) throw precondition_error("derivative checks need k >= 1");
  if (!(step > 0)) throw precondition_error("finite-difference step must be positive");
  for (real b : path.b) {
    if (!(b - step > 0 && b + step < 1))
      throw step_too_large("finite-difference step leaves (0,1) at b = " + std::to_string(static_cast<double>(b)));
  }
  const std::vector<real> b0 = path.b;
  // second differences lose four more digits to rounding than first differences, so they
  // run on a coarser step (the Richardson step removes the h^2 term)
  real step2 = 100 * step;
  for (real b : path.b) step2 = std::min(step2, std::min(b, 1 - b) / 2);
  auto gam_of = [](const std::vector<real>& b) {
    std::vector<real> g(b.size());
    for (size_t i = 0; i < b.size(); ++i) g[i] = (1 - b[i]) / b[i];
    return g;
  };

  // ln|W^n| as a function of gamma and of b; the path expansion sums positive terms,
  // so the relative error of the determinant, and hence the absolute error of its
  // logarithm, stays at a few ulps per matrix entry.
  scalar_fn ln_w_gamma = [&](const std::vector<real>& g) { return std::log(typestar_det(w_matrix(q, g, 1, n))); };
  scalar_fn ln_w = [&](const std::vector<real>& b) { return ln_w_gamma(gam_of(b)); };
  scalar_fn ln_psi = [&](const std::vector<real>& b) {
    real s = 0;
    for (real v : b) s += std::log((1 - v) / v);
    return s - ln_w(b);
  };
  const real log_round = 8 * (n + 2) * real_eps;

  derivative_report rep;
  std::vector<real> g0 = gam_of(b0);

  // logarithmic derivative in gamma_j lies in (b_j, 1/gamma_j)
  for (int j = 0; j < n; ++j) {
    fd_value d = first_partial(ln_w_gamma, g0, j, step * g0[j], log_round);
    real margin = std::min(d.value - b0[j], 1 / g0[j] - d.value);
    record(rep, "log_derivative_bound", j + 1, j + 1, d.value, margin, d.error);
  }

  // mixed partials of ln|W^n| are positive
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      fd_value d = mixed_partial(ln_w, b0, i, j, step2, log_round);
      record(rep, "mixed_partial_positive", i + 1, j + 1, d.value, d.value, d.error);
    }
  }

  // ln Psi_n is concave in each b_j
  for (int j = 0; j < n; ++j) {
    fd_value d = second_partial(ln_psi, b0, j, step2, log_round);
    record(rep, "log_psi_concave", j + 1, j + 1, d.value, -d.value, d.error);
  }

  // gamma_i L_{i,n}: decreasing in b_i, increasing in b_j for j > i
  for (int i = 1; i <= n; ++i) {
    scalar_fn gl = [&, i](const std::vector<real>& b) {
      return ratio_table(q, mutation_path(b), 0, terminal_kind::q).gamma_L(i);
    };
    real val = gl(b0);
    real round = 16 * (n + 2) * real_eps * std::fabs(val);
    for (int j = i; j <= n; ++j) {
      fd_value d = first_partial(gl, b0, j - 1, step, round);
      if (j == i)
        record(rep, "gammaL_decreasing_own", i, j, d.value, -d.value, d.error);
      else
        record(rep, "gammaL_increasing_later", i, j, d.value, d.value, d.error);
    }
  }

  // R^n_{1,k}: decreasing and concave in every b_j
  scalar_fn r1k = [&](const std::vector<real>& b) { return ratio_table(q, mutation_path(b), k, terminal_kind::q).R(1, k); };
  real rv = r1k(b0);
  real r_round = 16 * (n + k + 2) * real_eps * std::fabs(rv);
  for (int j = 0; j < n; ++j) {
    fd_value d1 = first_partial(r1k, b0, j, step, r_round);
    record(rep, "R1k_decreasing", 1, j + 1, d1.value, -d1.value, d1.error);
    fd_value d2 = second_partial(r1k, b0, j, step2, r_round);
    record(rep, "R1k_concave", 1, j + 1, d2.value, -d2.value, d2.error);
  }
  return rep;
}

}  // namespace hoc
