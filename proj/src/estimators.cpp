#include <algorithm>
#include <cmath>
#include <map>

#include "hoc/format.hpp"
#include "hoc/random_models.hpp"
#include "hoc/ratio_kernel.hpp"
#include "mc_common.hpp"

namespace hoc {

using detail::summarize;

namespace {

void check_mc(const mc_options& opt) {
  if (opt.samples < 1) throw config_error("samples must be >= 1");
  if (!(opt.trunc_tol > 0)) throw config_error("truncation tolerance must be positive");
  if (opt.n_start < 2 || opt.n_max < opt.n_start) throw config_error("need 2 <= n_start <= n_max");
}

void extend(std::vector<real>& b, int n, const mutation_law& law, rng_stream& rng) {
  while (static_cast<int>(b.size()) < n) b.push_back(law.sample(rng));
}

struct aitken_result {
  real value;
  real error;
};

// Extrapolation of a1, a2, a3 (doubling n) assuming a geometric error in the doubling index.
aitken_result aitken(real a1, real a2, real a3) {
  real d1 = a2 - a1, d2 = a3 - a2;
  if (d1 == 0 || d2 == 0) return {a3, std::fabs(d2)};
  real rho = d2 / d1;
  if (!(rho > 0 && rho < 1)) return {a3, std::max(std::fabs(d1), std::fabs(d2))};
  real corr = d2 * rho / (1 - rho);
  return {a3 + corr, std::fabs(corr)};
}

}  // namespace

real shared_log_rate(const moment_sequence& q, real beta) {
  if (beta == 0) return -std::log(q.s_q());
  return std::log(gamma_L_bar(q, beta));
}

criterion_estimate kingman_criterion(const mutation_law& law, const moment_sequence& q) {
  criterion_estimate e;
  e.value = shared_log_rate(q, law.mean());
  e.exact = true;
  e.samples = 0;
  e.method = "kingman";
  return e;
}

criterion_estimate estimate_iid_criterion(const mutation_law& law, const moment_sequence& q, const mc_options& opt) {
  if (law.is_degenerate()) {
    criterion_estimate e = kingman_criterion(law, q);
    e.method = "iid_ratio";
    return e;
  }
  check_mc(opt);
  const int N = opt.samples;
  const real ls = std::log(q.s_q());
  std::vector<real> mu;
  q.mu_range(opt.n_max + 3, mu);
  std::vector<real> upper(N), lower(N);
  std::vector<int> ns(N), conv(N);
  parallel_for(N, opt.threads, [&](int i) {
    rng_stream rng(opt.seed, detail::tag_path, i);
    std::vector<real> b, work;
    int n = opt.n_start;
    while (true) {
      extend(b, n, law, rng);
      real gq = first_row_g(b.data(), n, terminal_kind::q, mu, work);
      real gd = first_row_g(b.data(), n, terminal_kind::delta, mu, work);
      upper[i] = std::log(gq) - ls;
      lower[i] = std::log(gd) - ls;
      conv[i] = upper[i] - lower[i] < opt.trunc_tol;
      if (conv[i] || n >= opt.n_max) break;
      n = std::min(2 * n, opt.n_max);
    }
    ns[i] = n;
  });
  criterion_estimate e;
  auto s = summarize(upper);
  e.value = s.mean;
  e.std_error = s.se;
  e.samples = N;
  e.upper_bias_bound = s.mean - summarize(lower).mean;
  e.n_trunc = *std::max_element(ns.begin(), ns.end());
  e.unconverged = static_cast<int>(std::count(conv.begin(), conv.end(), 0));
  e.method = "iid_ratio";
  return e;
}

criterion_estimate estimate_iid_criterion_psi(const mutation_law& law, const moment_sequence& q, int n,
                                              const mc_options& opt) {
  if (law.is_degenerate()) {
    criterion_estimate e = kingman_criterion(law, q);
    e.method = "iid_psi";
    return e;
  }
  check_mc(opt);
  if (n < 1) throw config_error("Psi route needs n >= 1");
  const int N = opt.samples;
  std::vector<real> vals(N);
  parallel_for(N, opt.threads, [&](int i) {
    rng_stream rng(opt.seed, detail::tag_path, i);
    std::vector<real> b;
    extend(b, 2 * n, law, rng);
    mutation_path full(b);
    vals[i] = (log_psi(q, full) - log_psi(q, full.prefix(n))) / n;
  });
  criterion_estimate e;
  auto s = summarize(vals);
  e.value = s.mean;
  e.std_error = s.se;
  e.samples = N;
  e.n_trunc = 2 * n;
  e.method = "iid_psi";
  return e;
}

criterion_estimate estimate_shared_criterion(const mutation_law& law, const moment_sequence& q, const mc_options& opt) {
  if (law.is_degenerate()) {
    criterion_estimate e = kingman_criterion(law, q);
    e.method = "shared";
    return e;
  }
  criterion_estimate e;
  e.method = "shared";
  if (law.finite_support() && opt.enumerate_discrete) {
    e.value = law.expect([&](real b) { return shared_log_rate(q, b); });
    e.exact = true;
    return e;
  }
  check_mc(opt);
  const int N = opt.samples;
  std::map<real, real> memo;
  if (law.finite_support())
    for (auto& [b, p] : law.atoms()) memo[b] = shared_log_rate(q, b);
  std::vector<real> vals(N);
  parallel_for(N, opt.threads, [&](int i) {
    rng_stream rng(opt.seed, detail::tag_shared, i);
    real b = law.sample(rng);
    auto it = memo.find(b);
    vals[i] = it != memo.end() ? it->second : shared_log_rate(q, b);
  });
  auto s = summarize(vals);
  e.value = s.mean;
  e.std_error = s.se;
  e.samples = N;
  return e;
}

std::string to_string(verdict_kind v) {
  switch (v) {
    case verdict_kind::no_condensation:
      return "no_condensation";
    case verdict_kind::condensation:
      return "condensation";
    case verdict_kind::boundary_inconclusive:
      return "boundary_inconclusive";
  }
  return {};
}

verdict_report condensation_verdict(real h, const moment_sequence& q, const criterion_estimate& est) {
  if (!(h >= q.s_q())) throw precondition_error("verdict needs h >= S_Q");
  verdict_report r;
  r.statistic = est.value + std::log(h);
  r.upper = r.statistic + 3 * (est.std_error + est.upper_bias_bound);
  r.lower = r.statistic - est.upper_bias_bound - 3 * est.std_error;
  if (h == q.s_q()) {
    // only the sufficient direction is available at h = S_Q
    r.sufficient_only = true;
    r.verdict = r.upper < 0 ? verdict_kind::no_condensation : verdict_kind::boundary_inconclusive;
    return r;
  }
  if (r.upper < 0)
    r.verdict = verdict_kind::no_condensation;
  else if (r.lower > 0)
    r.verdict = verdict_kind::condensation;
  else
    r.verdict = verdict_kind::boundary_inconclusive;
  return r;
}

// ---------------------------------------------------------------- equilibrium samples

namespace {

// 1 - b_1 - (1-b_1) sum_{l=1}^{l_max} Phi_{2,l-1} on a Q-terminal table, optionally filling coefficients.
real complement(const ratio_state& st, real b1, int l_max, std::vector<real>* coeffs) {
  if (coeffs) coeffs->assign(l_max + 1, 0);
  real sum = b1;
  if (coeffs) (*coeffs)[0] = b1;
  real prod = 1;
  for (int l = 1; l <= l_max; ++l) {
    real c = (1 - b1) * prod * st.ell(l + 1) * st.mu[l];
    if (coeffs) (*coeffs)[l] = c;
    sum += c;
    prod *= st.g(l + 1);
  }
  return 1 - sum;
}

}  // namespace

equilibrium_sample equilibrium_on_path(const mutation_path& path, measure_ptr q, int l_max, real residual_bound) {
  int n = path.size();
  if (l_max < 2) throw config_error("l_max must be >= 2");
  if (n < l_max + 2) throw precondition_error("equilibrium sampling needs n_trunc >= l_max + 2");
  equilibrium_sample out;
  out.path = path;
  real b1 = path.b_at(1);
  ratio_state st = ratio_table(*q, path, 0, terminal_kind::q);
  mixture_measure m;
  m.h = q->s_q();
  m.basis = q;
  real c = complement(st, b1, l_max, &m.coeffs);
  ratio_state half = ratio_table(*q, path.prefix(n / 2), 0, terminal_kind::q);
  real c_half = complement(half, b1, l_max / 2, nullptr);
  m.condensate = c;
  out.measure = std::move(m);
  out.residual = std::fabs(c - c_half);
  out.truncation_warning = out.residual > residual_bound;
  return out;
}

equilibrium_sample sample_equilibrium_iid(const mutation_law& law, measure_ptr q, int n_trunc, int l_max,
                                          std::uint64_t seed, std::uint64_t index, real residual_bound) {
  rng_stream rng(seed, detail::tag_path, index);
  std::vector<real> b;
  extend(b, n_trunc, law, rng);
  return equilibrium_on_path(mutation_path(b), q, l_max, residual_bound);
}

condensate_limit condensate_via_k_limit(const mutation_path& path, const moment_sequence& q, int k_max, int j) {
  if (q.atom_at_sq()) throw precondition_error("the k-limit of S^-k R_{j+2,k} needs Q(S_Q) = 0");
  if (j < 0) throw config_error("row index j must be >= 0");
  if (k_max < 4) throw config_error("k_max must be >= 4");
  int n = path.size();
  int row = j + 2;
  if (n / 8 < row + 1) throw precondition_error("path too short for the n-extrapolation");
  // the k -> infinity limit at finite n is the delta_{S_Q} mass prod_{i >= row} g_i
  real a[4];
  for (int t = 0; t < 3; ++t) a[t] = ratio_table(q, path.prefix(n >> (3 - t)), 0, terminal_kind::delta).atom(row);
  ratio_state top = ratio_table(q, path, k_max, terminal_kind::delta);
  a[3] = top.atom(row);
  aitken_result lo = aitken(a[0], a[1], a[2]);
  aitken_result hi = aitken(a[1], a[2], a[3]);
  real factor = 1 - path.b_at(j + 1);
  condensate_limit res;
  res.n = n;
  res.value = factor * hi.value;
  res.error = factor * (std::fabs(hi.value - lo.value) + 64 * real_eps * std::fabs(hi.value));
  res.column = factor * top.r(row, k_max);
  res.column_extrapolated =
      factor * aitken(top.r(row, k_max / 4), top.r(row, k_max / 2), top.r(row, k_max)).value;
  return res;
}

// ---------------------------------------------------------------- first-model summary

first_model_summary summarize_first_model(const mutation_law& law, measure_ptr q, const std::vector<int>& k_list,
                                          const mc_options& opt, bool condensates) {
  first_model_summary out;
  out.k_list = k_list;
  int kmax = 1;
  for (int k : k_list) {
    if (k < 1) throw config_error("moment orders must be >= 1");
    kmax = std::max(kmax, k);
  }
  const real s = q->s_q();
  const size_t K = k_list.size();
  if (law.is_degenerate()) {
    // Kingman is the degenerate case of the first model
    real b = law.mean();
    if (b == 0) throw config_error("degenerate law needs b > 0");
    kingman_equilibrium eq = solve_kingman(q, b);
    for (int k : k_list) {
      out.moment_mean.push_back(eq.moment(k));
      out.moment_se.push_back(0);
      out.moment_bias.push_back(0);
    }
    out.log_mean_moment = std::log(kingman_first_moment(*q, b));
    out.series_mean = out.eq20_mean = eq.condensate;
    out.positive_fraction = eq.condensate > 0 ? 1 : 0;
    return out;
  }
  check_mc(opt);
  if (condensates && opt.n_trunc < opt.l_max + 2) throw config_error("n_trunc must be >= l_max + 2");
  const int N = opt.samples;
  const bool eq20 = condensates && !q->atom_at_sq();
  std::vector<real> mu;
  q->mu_range(opt.n_max + kmax + 3, mu);
  std::vector<std::vector<real>> mom(K, std::vector<real>(N)), bias(K, std::vector<real>(N));
  std::vector<real> logm(N), series(N), series_res(N), e20(N), e20_err(N), gap(N), positive(N);
  std::vector<int> ns(N), conv(N);
  parallel_for(N, opt.threads, [&](int i) {
    rng_stream rng(opt.seed, detail::tag_path, i);
    std::vector<real> b, work, r2q, r2d;
    int n = opt.n_start;
    while (true) {
      extend(b, n, law, rng);
      real gq = first_row_g(b.data(), n, terminal_kind::q, mu, work, kmax, &r2q);
      real gd = first_row_g(b.data(), n, terminal_kind::delta, mu, work, kmax, &r2d);
      real width = std::log(gq) - std::log(gd);
      for (int k = 1; k <= kmax; ++k) width = std::max(width, (r2d[k] - r2q[k]) / r2q[k]);
      conv[i] = width < opt.trunc_tol;
      if (conv[i] || n >= opt.n_max) break;
      n = std::min(2 * n, opt.n_max);
    }
    ns[i] = n;
    real b1 = b[0];
    // int y^k H_0 = b_1 m_k + (1-b_1) R_{2,k}; the delta side is the upper bracket
    for (size_t t = 0; t < K; ++t) {
      int k = k_list[t];
      real sk = std::pow(s, static_cast<real>(k));
      mom[t][i] = b1 * q->moment(k) + (1 - b1) * sk * r2d[k];
      bias[t][i] = (1 - b1) * sk * (r2d[k] - r2q[k]);
    }
    logm[i] = std::log(b1 * q->moment(1) + (1 - b1) * s * r2d[1]);
    if (!condensates) return;
    extend(b, opt.n_trunc, law, rng);
    mutation_path path(std::vector<real>(b.begin(), b.begin() + opt.n_trunc));
    equilibrium_sample es = equilibrium_on_path(path, q, opt.l_max);
    series[i] = es.measure.condensate;
    series_res[i] = es.residual;
    if (eq20) {
      condensate_limit cl = condensate_via_k_limit(path, *q, opt.k_max);
      e20[i] = cl.value;
      e20_err[i] = cl.error;
      gap[i] = series[i] - e20[i];
      positive[i] = cl.value > cl.error ? 1 : 0;
    } else {
      positive[i] = series[i] > series_res[i] ? 1 : 0;
    }
  });
  for (size_t t = 0; t < K; ++t) {
    auto st = summarize(mom[t]);
    out.moment_mean.push_back(st.mean);
    out.moment_se.push_back(st.se);
    out.moment_bias.push_back(detail::mean_of(bias[t]));
  }
  auto lm = summarize(logm);
  out.log_mean_moment = lm.mean;
  out.log_mean_moment_se = lm.se;
  out.samples = N;
  out.unconverged = static_cast<int>(std::count(conv.begin(), conv.end(), 0));
  out.max_n = *std::max_element(ns.begin(), ns.end());
  if (condensates) {
    auto sr = summarize(series);
    out.series_mean = sr.mean;
    out.series_se = sr.se;
    out.series_residual = detail::mean_of(series_res);
    out.positive_fraction = detail::mean_of(positive);
    if (eq20) {
      auto er = summarize(e20);
      out.eq20_mean = er.mean;
      out.eq20_se = er.se;
      out.eq20_error = detail::mean_of(e20_err);
      auto gr = summarize(gap);
      out.route_gap = gr.mean;
      out.route_gap_se = gr.se;
      out.routes_consistent =
          std::fabs(gr.mean) <= 3 * gr.se + out.series_residual + out.eq20_error + 64 * real_eps;
    } else {
      out.eq20_mean = out.series_mean;
      out.eq20_se = out.series_se;
    }
  }
  return out;
}

}  // namespace hoc
