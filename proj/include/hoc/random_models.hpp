#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hoc/iteration.hpp"
#include "hoc/kingman.hpp"
#include "hoc/measure.hpp"

namespace hoc {

// ---------------------------------------------------------------- randomness

// Counter-based generator: the output depends only on (key, counter), so a sample
// index maps to the same stream no matter which worker draws it.
class rng_stream {
 public:
  using result_type = std::uint64_t;
  rng_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();
  // uniform on [0,1) with 64 random bits
  real uniform();

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

// Runs body(i) for i in [0,count) on `threads` workers (0 = hardware concurrency).
void parallel_for(int count, int threads, const std::function<void(int)>& body);

// ---------------------------------------------------------------- mutation laws

enum class law_kind { degenerate, two_point, discrete, beta_law };

class mutation_law {
 public:
  static mutation_law degenerate(real b);
  static mutation_law two_point(real b1, real b2, real p);
  static mutation_law discrete(std::vector<std::pair<real, real>> atoms, bool allow_one = false);
  // scale * Beta(a, c)
  static mutation_law beta_law(real a, real c, real scale, bool allow_one = false);

  law_kind kind() const { return kind_; }
  real mean() const;
  bool is_degenerate() const;
  bool finite_support() const { return kind_ != law_kind::beta_law; }
  // (value, probability) pairs for finite support
  const std::vector<std::pair<real, real>>& atoms() const { return atoms_; }
  real sample(rng_stream& rng) const;
  // E[f(beta)]: enumeration for finite support, quadrature otherwise
  real expect(const std::function<real(real)>& f) const;
  std::string describe() const;

 private:
  law_kind kind_ = law_kind::degenerate;
  std::vector<std::pair<real, real>> atoms_;
  std::vector<real> cdf_;
  real a_ = 1, c_ = 1, scale_ = 1;
};

// `degenerate b=0.5`, `two_point b1=0.3 b2=0.9 p=0.5`, `discrete [(b,p),...]`,
// `beta_law a=2 c=5 scale=0.99`. With allow_one the support may reach 1.
mutation_law parse_mutation_law(const std::string& spec, bool allow_one = false);

// ---------------------------------------------------------------- estimators

struct mc_options {
  int samples = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  real trunc_tol = 1e-9L;  // per-sample bracket width on the log scale
  int n_start = 16;
  int n_max = 1024;
  int n_trunc = 256;  // condensate routes
  int l_max = 128;
  int k_max = 128;
  bool enumerate_discrete = false;  // exact expectation over finite-support laws
};

struct criterion_estimate {
  real value = 0;
  real std_error = 0;
  int n_trunc = 0;
  int samples = 0;
  real upper_bias_bound = 0;  // value - bias <= limit <= value, up to sampling error
  int unconverged = 0;        // samples that hit n_max before the bracket closed
  bool exact = false;
  std::string method;
};

// E[ln Gamma_1 L~_1] from per-sample ratio tables with adaptive doubling of n.
criterion_estimate estimate_iid_criterion(const mutation_law& law, const moment_sequence& q, const mc_options& opt);
// The same target through (ln Psi_{2n} - ln Psi_n) / n.
criterion_estimate estimate_iid_criterion_psi(const mutation_law& law, const moment_sequence& q, int n,
                                              const mc_options& opt);
// E[ln Gamma L^] with Gamma L^ = (1-beta) / int y A_Q(dy), exact per sample.
criterion_estimate estimate_shared_criterion(const mutation_law& law, const moment_sequence& q, const mc_options& opt);
// ln gamma L-bar at b = E[beta].
criterion_estimate kingman_criterion(const mutation_law& law, const moment_sequence& q);

// ln((1-beta)/int y A_Q) for one beta
real shared_log_rate(const moment_sequence& q, real beta);

enum class verdict_kind { no_condensation, condensation, boundary_inconclusive };
std::string to_string(verdict_kind v);

struct verdict_report {
  verdict_kind verdict = verdict_kind::boundary_inconclusive;
  real statistic = 0;  // estimate + ln h
  real upper = 0;      // statistic + 3 (std_error + bias)
  real lower = 0;      // statistic - bias - 3 std_error
  bool sufficient_only = false;
};

verdict_report condensation_verdict(real h, const moment_sequence& q, const criterion_estimate& est);

// ---------------------------------------------------------------- first-model equilibrium

struct equilibrium_sample {
  mixture_measure measure;  // c_0 = beta_1, c_l = (1-beta_1) Phi_{2,l-1}, condensate = 1 - sum
  mutation_path path;
  real residual = 0;  // change of the complement between (n/2, l_max/2) and (n, l_max)
  bool truncation_warning = false;
};

equilibrium_sample sample_equilibrium_iid(const mutation_law& law, measure_ptr q, int n_trunc, int l_max,
                                          std::uint64_t seed, std::uint64_t index = 0, real residual_bound = 1e-6L);
// Same on a given path b_1..b_n.
equilibrium_sample equilibrium_on_path(const mutation_path& path, measure_ptr q, int l_max,
                                       real residual_bound = 1e-6L);

struct condensate_limit {
  real value = 0;   // H_j
  real error = 0;
  real column = 0;  // (1-b_{j+1}) S^{-k} R_{j+2,k} at k = k_max on the largest table
  real column_extrapolated = 0;
  int n = 0;
};

// H_j / (1 - b_{j+1}) = lim_k S^{-k} R_{j+2,k}, evaluated on delta_{S_Q}-terminal tables
// of sizes n/4, n/2, n (n = path length) and extrapolated in n. Needs Q(S_Q) = 0.
condensate_limit condensate_via_k_limit(const mutation_path& path, const moment_sequence& q, int k_max, int j = 0);

// Per-sample summaries of the first random model.
struct first_model_summary {
  std::vector<int> k_list;
  std::vector<real> moment_mean, moment_se, moment_bias;  // E[int y^k I_Q]
  real log_mean_moment = 0, log_mean_moment_se = 0;       // E[ln int y I_Q]
  real series_mean = 0, series_se = 0, series_residual = 0;
  real eq20_mean = 0, eq20_se = 0, eq20_error = 0;
  real route_gap = 0, route_gap_se = 0;  // paired difference of the two condensate routes
  bool routes_consistent = true;
  real positive_fraction = 0;  // samples with a resolved positive condensate
  int samples = 0, unconverged = 0, max_n = 0;
};

first_model_summary summarize_first_model(const mutation_law& law, measure_ptr q, const std::vector<int>& k_list,
                                          const mc_options& opt, bool condensates = true);

struct second_model_summary {
  std::vector<int> k_list;
  std::vector<real> moment_mean, moment_se;  // E[int y^k A_Q]
  real log_mean_moment = 0, log_mean_moment_se = 0;
  real condensate_mean = 0, condensate_se = 0;  // E[A_Q]
  int samples = 0;
};

second_model_summary summarize_second_model(const mutation_law& law, measure_ptr q, const std::vector<int>& k_list,
                                            const mc_options& opt);

struct comparison_row {
  std::string quantity;
  std::string model;
  real estimate = 0;
  real std_error = 0;
  std::string paper_direction;
  bool satisfied = true;
};

struct comparison_report {
  std::vector<comparison_row> rows;
  bool any_violation = false;
};

comparison_report compare_models(const mutation_law& law, measure_ptr q, const std::vector<int>& k_list,
                                 const mc_options& opt);

std::string comparison_csv(const comparison_report& rep);

// Two-point laws centred on b(t) of the uniform-Q parametrization for t in the regions
// of the scan where theta_b is convex and where it is concave. Empty when a region is absent.
struct curvature_laws {
  std::vector<mutation_law> convex_region;
  std::vector<mutation_law> concave_region;
};
curvature_laws laws_from_curvature(const curvature_scan& scan, real half_width);

// E[int y A_Q] - int y K_Q, exact for finite-support laws
real second_vs_kingman_first_moment_gap(const mutation_law& law, const moment_sequence& q);

// ---------------------------------------------------------------- exchangeable inequality

// f(x) = a sum x_i^2 + c (sum x_i)^2 + d sum x_i; every cross partial equals 2c.
struct quadratic_form {
  real a = 0, c = 0, d = 0;
};

quadratic_form parse_quadratic_form(const std::string& spec);

struct exchangeable_report {
  real lhs = 0, rhs = 0;            // Monte Carlo means of f(xi_1..xi_n) and f(xi_1,..,xi_1)
  real margin = 0, margin_se = 0;   // paired lhs - rhs
  real exact_lhs = 0, exact_rhs = 0;
  real sigmas = 0;                  // margin / margin_se
  bool holds = true;
};

exchangeable_report exchangeable_inequality_check(const quadratic_form& f, const mutation_law& xi, int n, int samples,
                                                   std::uint64_t seed);

}  // namespace hoc
