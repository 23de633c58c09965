#include "hoc/ratio_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hoc/format.hpp"

namespace hoc {

real ratio_state::R(int j, int k) const { return r(j, k) * std::pow(s, static_cast<real>(k)); }

real ratio_state::phi(int j, int l) const {
  if (j < 1 || l < 0 || j + l > n + 1) throw precondition_error("phi index outside the ratio table");
  real p = 1;
  for (int i = 0; i < l; ++i) p *= gs[j + i];
  return p * ls[j + l] * mu[l + 1];
}

real ratio_state::atom(int j) const {
  if (term == terminal_kind::q) return 0;
  real p = 1;
  for (int i = j; i <= n; ++i) p *= gs[i];
  return p;
}

std::string ratio_state::debug_csv() const {
  std::ostringstream os;
  os << "j,k,n,R,gammaL\n";
  for (int j = 1; j <= n + 1; ++j) {
    for (int k = 0; k <= k_max; ++k) {
      os << j << ',' << k << ',' << n << ',' << format_real(R(j, k)) << ',';
      if (j <= n) os << format_real(gamma_L(j));
      os << '\n';
    }
  }
  return os.str();
}

namespace {

// One backward sweep. `cur` holds the terminal row on entry, indices 0..K with
// K >= k_keep + n; `row_cb(j, cur)` is called after each row is finished.
template <class RowCb>
void sweep(const real* b, int n, const real* mu, std::vector<real>& cur, int K, real* gs, real* ls, RowCb row_cb) {
  const real mu1 = mu[1];
  for (int j = n; j >= 1; --j) {
    int len = K - (n + 1 - j);  // last valid column of row j
    real bj = b[j - 1];
    if (bj == 0) {
      real d = cur[1];
      for (int k = 0; k <= len; ++k) cur[k] = cur[k + 1] / d;
      gs[j] = 1 / d;
      ls[j] = 0;
    } else {
      real gam = (1 - bj) / bj;
      real d = mu1 + gam * cur[1];
      real inv = 1 / d;
      for (int k = 0; k <= len; ++k) cur[k] = (mu[k + 1] + gam * cur[k + 1]) * inv;
      cur[0] = 1;
      gs[j] = gam * inv;
      ls[j] = inv;
    }
    row_cb(j, cur);
  }
}

void fill_terminal(std::vector<real>& cur, int K, const real* mu, terminal_kind term) {
  cur.resize(K + 2);
  if (term == terminal_kind::q) {
    for (int k = 0; k <= K; ++k) cur[k] = mu[k + 1] / mu[1];
  } else {
    for (int k = 0; k <= K; ++k) cur[k] = 1;
  }
}

}  // namespace

ratio_state ratio_table(const moment_sequence& q, const mutation_path& path, int k_max, terminal_kind term) {
  if (k_max < 0) throw precondition_error("k_max must be >= 0");
  ratio_state st;
  st.n = path.size();
  st.k_max = k_max;
  st.term = term;
  st.s = q.s_q();
  int n = st.n;
  int K = k_max + n;
  q.mu_range(K + 2, st.mu);
  st.rs.assign(static_cast<size_t>(n + 1) * (k_max + 1), 0);
  st.gs.assign(n + 2, 0);
  st.ls.assign(n + 2, 0);
  std::vector<real> cur;
  fill_terminal(cur, K, st.mu.data(), term);
  auto store = [&](int j, const std::vector<real>& row) {
    std::copy(row.begin(), row.begin() + k_max + 1, st.rs.begin() + static_cast<size_t>(j - 1) * (k_max + 1));
  };
  store(n + 1, cur);
  st.ls[n + 1] = term == terminal_kind::q ? 1 / st.mu[1] : 0;
  sweep(path.b.data(), n, st.mu.data(), cur, K, st.gs.data(), st.ls.data(), store);
  return st;
}

real first_row_g(const real* b, int n, terminal_kind term, const std::vector<real>& mu,
                 std::vector<real>& work, int k_max, std::vector<real>* r2) {
  int K = k_max + n;
  if (static_cast<int>(mu.size()) < K + 3) throw precondition_error("moment buffer too short for the table");
  fill_terminal(work, K, mu.data(), term);
  if (r2 && n == 1) r2->assign(work.begin(), work.begin() + k_max + 1);
  const real mu1 = mu[1];
  real g = 0;
  for (int j = n; j >= 1; --j) {
    int len = K - (n + 1 - j);
    real bj = b[j - 1];
    if (bj == 0) {
      real d = work[1];
      for (int k = 0; k <= len; ++k) work[k] = work[k + 1] / d;
      g = 1 / d;
    } else {
      real gam = (1 - bj) / bj;
      real inv = 1 / (mu1 + gam * work[1]);
      for (int k = 0; k <= len; ++k) work[k] = (mu[k + 1] + gam * work[k + 1]) * inv;
      work[0] = 1;
      g = gam * inv;
    }
    if (j == 2 && r2) r2->assign(work.begin(), work.begin() + k_max + 1);
  }
  return g;
}

limit_result limits(const moment_sequence& q, const std::function<real(int)>& b_of, const limit_options& opt) {
  if (!(opt.tol > 0)) throw precondition_error("limit tolerance must be positive");
  if (opt.row < 1) throw precondition_error("row index must be >= 1");
  limit_result res;
  std::vector<real> b;
  real prev_gl = 0;
  bool have_prev = false;
  int n = std::max(opt.n_start, opt.row);
  while (true) {
    while (static_cast<int>(b.size()) < n) b.push_back(b_of(static_cast<int>(b.size()) + 1));
    mutation_path path(b);
    ratio_state lo = ratio_table(q, path, opt.k_max, terminal_kind::q);
    ratio_state hi = ratio_table(q, path, opt.k_max, terminal_kind::delta);
    int j = opt.row;
    res.n = n;
    res.gl_upper = lo.gamma_L(j);
    res.gl_lower = hi.gamma_L(j);
    res.r_lower.assign(opt.k_max + 1, 0);
    res.r_upper.assign(opt.k_max + 1, 0);
    real rwidth = 0;
    bool inverted = res.gl_lower > res.gl_upper * (1 + 64 * real_eps);
    for (int k = 0; k <= opt.k_max; ++k) {
      res.r_lower[k] = lo.R(j, k);
      res.r_upper[k] = hi.R(j, k);
      rwidth = std::max(rwidth, hi.r(j, k) - lo.r(j, k));
      if (lo.r(j, k) > hi.r(j, k) * (1 + 64 * real_eps)) inverted = true;
    }
    res.inverted = inverted;
    res.change = have_prev ? std::fabs(res.gl_upper - prev_gl) : real_inf;
    real gwidth = hi.s * (res.gl_upper - res.gl_lower);
    if (std::max(gwidth, rwidth) < opt.tol) {
      res.converged = true;
      return res;
    }
    if (n >= opt.n_max) return res;
    prev_gl = res.gl_upper;
    have_prev = true;
    n = std::min(2 * n, opt.n_max);
  }
}

real log_psi(const moment_sequence& q, const mutation_path& path) {
  for (real b : path.b) {
    if (b == 0) throw unsupported_family("Psi_n is undefined when some gamma_j is infinite");
  }
  ratio_state st = ratio_table(q, path, 0, terminal_kind::q);
  real ls = std::log(q.s_q());
  real sum = 0;
  for (int j = 1; j <= st.n; ++j) sum += std::log(st.g(j)) - ls;
  return sum - std::log(q.moment(1));
}

}  // namespace hoc
