#include "hoc/iteration.hpp"

#include <algorithm>
#include <cmath>

#include "hoc/ratio_kernel.hpp"

namespace hoc {

mutation_path::mutation_path(std::vector<real> bs) : b(std::move(bs)) {
  for (real v : b) {
    if (!(v >= 0 && v < 1)) throw config_error("mutation probabilities must lie in [0,1)");
  }
}

mutation_path mutation_path::prefix(int n) const {
  if (n > size()) throw precondition_error("path prefix longer than the path");
  return mutation_path(std::vector<real>(b.begin(), b.begin() + n));
}

mixture_measure forward_step(const mixture_measure& p, real b) {
  if (!(b >= 0 && b < 1)) throw config_error("mutation probability must lie in [0,1)");
  const moment_sequence& q = *p.basis;
  real m = mixture_moment(p, 1);
  if (!(m > 0)) throw degenerate_measure("fitness distribution has zero first moment");
  real s = q.s_q();
  mixture_measure out;
  out.h = p.h;
  out.basis = p.basis;
  out.condensate = (1 - b) * p.condensate * p.h / m;
  // unresolved mass is treated as sitting at the top of the support
  out.unresolved = (1 - b) * p.unresolved * std::max(p.h, s) / m;
  out.coeffs.assign(p.coeffs.size() + 1, 0);
  out.coeffs[0] = b;
  for (size_t l = 0; l < p.coeffs.size(); ++l) {
    if (p.coeffs[l] == 0) continue;
    int li = static_cast<int>(l);
    out.coeffs[l + 1] += (1 - b) * p.coeffs[l] * (q.mu(li + 1) / q.mu(li) * s) / m;
  }
  truncate_coeffs(out);
  return out;
}

std::vector<mixture_measure> backward_sequence(const mutation_path& path, const mixture_measure& terminal) {
  std::vector<mixture_measure> out;
  out.reserve(path.size() + 1);
  out.push_back(terminal);
  for (int j = path.size() - 1; j >= 0; --j) out.push_back(forward_step(out.back(), path.b_at(j + 1)));
  return out;
}

std::vector<mixture_measure> forward_sequence(const mutation_path& path, const mixture_measure& p0) {
  std::vector<mixture_measure> out;
  out.reserve(path.size());
  const mixture_measure* prev = &p0;
  for (int j = 1; j <= path.size(); ++j) {
    out.push_back(forward_step(*prev, path.b_at(j)));
    prev = &out.back();
  }
  return out;
}

atomic_measure atomic_step(const atomic_measure& p, real b, const atomic_measure& q) {
  real m = p.moment(1);
  if (!(m > 0)) throw degenerate_measure("fitness distribution has zero first moment");
  atomic_measure out;
  size_t i = 0, j = 0;
  while (i < p.x.size() || j < q.x.size()) {
    if (j == q.x.size() || (i < p.x.size() && p.x[i] < q.x[j])) {
      out.x.push_back(p.x[i]);
      out.w.push_back((1 - b) * p.x[i] * p.w[i] / m);
      ++i;
    } else if (i == p.x.size() || q.x[j] < p.x[i]) {
      out.x.push_back(q.x[j]);
      out.w.push_back(b * q.w[j]);
      ++j;
    } else {
      out.x.push_back(p.x[i]);
      out.w.push_back((1 - b) * p.x[i] * p.w[i] / m + b * q.w[j]);
      ++i, ++j;
    }
  }
  return out;
}

atomic_measure atomic_iterate(const atomic_measure& p0, const mutation_path& path, const moment_sequence& q) {
  if (q.kind() != family::atomic) throw unsupported_family("atomic iteration needs an atomic Q");
  atomic_measure qa = to_atomic(q);
  atomic_measure cur = p0;
  for (int j = 1; j <= path.size(); ++j) cur = atomic_step(cur, path.b_at(j), qa);
  return cur;
}

std::vector<std::vector<real>> coefficient_expansion(const moment_sequence& q, const mutation_path& path) {
  int n = path.size();
  ratio_state st = ratio_table(q, path, 0, terminal_kind::q);
  std::vector<std::vector<real>> c(n + 1);
  for (int j = 0; j < n; ++j) {
    real b = path.b_at(j + 1);
    c[j].assign(n - j + 1, 0);
    c[j][0] = b;
    for (int l = 1; l <= n - j; ++l) c[j][l] = (1 - b) * st.phi(j + 2, l - 1);
  }
  c[n] = {1};
  return c;
}

}  // namespace hoc
