#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>

#include "hoc/kingman.hpp"
#include "hoc/random_models.hpp"

using namespace hoc;

namespace {

// theta for uniform Q by inverting b(t) = -t / ln(1-t), which is decreasing in t
real uniform_theta_by_inversion(real b) {
  real lo = 1e-15L, hi = 1 - 1e-15L;
  for (int i = 0; i < 200; ++i) {
    real mid = (lo + hi) / 2;
    (uniform_b_of_t(mid) > b ? lo : hi) = mid;
  }
  return uniform_theta_of_t((lo + hi) / 2);
}

mc_options small_opts(int samples, std::uint64_t seed = 1) {
  mc_options o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("rng streams are keyed by seed, tag and index") {
  rng_stream a(1, 2, 3), b(1, 2, 3), c(1, 2, 4), d(2, 2, 3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    auto x = a();
    CHECK(x == b());
    seen.insert(x);
    seen.insert(c());
    seen.insert(d());
  }
  CHECK(seen.size() == 300);
  rng_stream u(5, 5, 5);
  real mean = 0;
  for (int i = 0; i < 20000; ++i) {
    real v = u.uniform();
    CHECK(v >= 0);
    CHECK(v < 1);
    mean += v;
  }
  CHECK(std::fabs(mean / 20000 - 0.5L) < 5 * std::sqrt(1.0L / 12 / 20000));
}

TEST_CASE("parallel_for visits every index once and propagates exceptions") {
  for (int threads : {0, 1, 3}) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(257, threads, [&](int i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, 2, [](int i) {
                    if (i == 7) throw numeric_error("boom");
                  }),
                  numeric_error);
}

TEST_CASE("mutation law grammar and moments") {
  auto tp = parse_mutation_law("two_point b1=0.3 b2=0.9 p=0.25");
  CHECK(tp.kind() == law_kind::two_point);
  CHECK(std::fabs(tp.mean() - (0.25L * 0.3L + 0.75L * 0.9L)) < 1e-18L);
  auto dg = parse_mutation_law("degenerate b=0.4");
  CHECK(dg.is_degenerate());
  CHECK(parse_mutation_law("two_point b1=0.4 b2=0.4 p=0.5").is_degenerate());
  auto ds = parse_mutation_law("discrete [(0.1,0.2),(0.5,0.3),(0.1,0.5)]");
  CHECK(ds.atoms().size() == 2);
  CHECK(std::fabs(ds.mean() - (0.07L + 0.15L)) < 1e-18L);
  auto bl = parse_mutation_law("beta_law a=2 c=5 scale=0.9");
  CHECK_FALSE(bl.finite_support());
  CHECK(std::fabs(bl.mean() - 0.9L * 2 / 7) < 1e-15L);
  CHECK(std::fabs(bl.expect([](real x) { return x * x; }) - 0.81L * 2 * 3 / (7.0L * 8)) < 1e-14L);
  CHECK(parse_mutation_law(tp.describe()).describe() == tp.describe());

  CHECK_THROWS_AS(parse_mutation_law("two_point b1=0.3 b2=1 p=0.5"), config_error);
  CHECK_THROWS_AS(parse_mutation_law("two_point b1=0.3 b2=0.5 p=1.5"), config_error);
  CHECK_THROWS_AS(parse_mutation_law("discrete [(0.1,0.2),(0.5,0.3)]"), config_error);
  CHECK_THROWS_AS(parse_mutation_law("beta_law a=2 c=5 scale=1"), config_error);
  CHECK_THROWS_AS(parse_mutation_law("poisson l=1"), config_error);
  CHECK_NOTHROW(parse_mutation_law("discrete [(0,0.5),(1,0.5)]", true));
}

TEST_CASE("sampling frequencies") {
  auto tp = mutation_law::two_point(0.3L, 0.9L, 0.25L);
  rng_stream r(9, 1, 0);
  int low = 0, n = 40000;
  for (int i = 0; i < n; ++i) low += tp.sample(r) == 0.3L;
  CHECK(std::fabs(low / static_cast<real>(n) - 0.25L) < 5 * std::sqrt(0.25L * 0.75L / n));
  auto bl = mutation_law::beta_law(2, 5, 0.9L);
  real s = 0;
  for (int i = 0; i < n; ++i) s += bl.sample(r);
  real sd = 0.9L * std::sqrt(2 * 5 / (49.0L * 8));
  CHECK(std::fabs(s / n - bl.mean()) < 5 * sd / std::sqrt(static_cast<real>(n)));
}

TEST_CASE("degenerate laws reduce every criterion to the deterministic value") {
  auto q = make_measure("uniform");
  auto law = mutation_law::degenerate(0.4L);
  real want = std::log(gamma_L_bar(*q, 0.4L));
  auto iid = estimate_iid_criterion(law, *q, small_opts(10));
  auto sh = estimate_shared_criterion(law, *q, small_opts(10));
  auto kc = kingman_criterion(law, *q);
  CHECK(iid.exact);
  CHECK(std::fabs(iid.value - want) < 1e-15L);
  CHECK(std::fabs(sh.value - want) < 1e-15L);
  CHECK(std::fabs(kc.value - want) < 1e-15L);
  CHECK(iid.std_error == 0);
}

TEST_CASE("shared model enumeration against an independent theta") {
  auto q = make_measure("uniform");
  auto law = mutation_law::discrete({{0.2L, 0.3L}, {0.5L, 0.5L}, {0.85L, 0.2L}});
  real want = 0;
  for (auto [b, p] : law.atoms()) want += p * std::log((1 - b) / uniform_theta_by_inversion(b));
  mc_options o = small_opts(1);
  o.enumerate_discrete = true;
  auto ex = estimate_shared_criterion(law, *q, o);
  CHECK(ex.exact);
  CHECK(std::fabs(ex.value - want) < 1e-12L);
  auto mc = estimate_shared_criterion(law, *q, small_opts(4000, 3));
  CHECK(std::fabs(mc.value - want) < 4 * mc.std_error);
  for (auto [b, p] : law.atoms())
    CHECK(std::fabs(shared_log_rate(*q, b) - std::log((1 - b) / uniform_theta_by_inversion(b))) < 1e-12L);
}

TEST_CASE("condensed support: the shared rate is -ln S_Q") {
  auto q = make_measure("poly_decay p=2");
  auto law = mutation_law::two_point(0.2L, 0.5L, 0.5L);
  mc_options o = small_opts(1);
  o.enumerate_discrete = true;
  CHECK(std::fabs(estimate_shared_criterion(law, *q, o).value) < 1e-15L);
  auto qs = make_measure("poly_decay p=2 scale=0.5");
  CHECK(std::fabs(estimate_shared_criterion(law, *qs, o).value - std::log(2.0L)) < 1e-15L);
}

TEST_CASE("property: the finite-n estimate decreases with n at a fixed seed") {
  auto q = make_measure("uniform");
  auto law = mutation_law::two_point(0.3L, 0.9L, 0.5L);
  real prev = real_inf;
  for (int n : {4, 8, 16, 32, 64}) {
    mc_options o = small_opts(300, 17);
    o.n_start = o.n_max = n;
    o.trunc_tol = 1e-300L;
    real v = estimate_iid_criterion(law, *q, o).value;
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("Psi route and ratio route agree within Monte Carlo error") {
  auto q = make_measure("uniform");
  auto law = mutation_law::two_point(0.3L, 0.9L, 0.5L);
  auto ratio = estimate_iid_criterion(law, *q, small_opts(3000, 5));
  auto psi = estimate_iid_criterion_psi(law, *q, 128, small_opts(3000, 6));
  real se = std::hypot(ratio.std_error, psi.std_error);
  CHECK(std::fabs(ratio.value - psi.value) < 4 * se + ratio.upper_bias_bound + 0.02L);
  CHECK(ratio.unconverged == 0);
}

TEST_CASE("second random model dominates the first, Kingman dominates both") {
  auto q = make_measure("uniform");
  auto law = mutation_law::two_point(0.3L, 0.9L, 0.5L);
  auto sh = estimate_shared_criterion(law, *q, small_opts(5000, 2));
  auto iid = estimate_iid_criterion(law, *q, small_opts(5000, 2));
  auto kc = kingman_criterion(law, *q);
  CHECK(iid.value - sh.value > 3 * std::hypot(iid.std_error, sh.std_error) + iid.upper_bias_bound);
  CHECK(kc.value - iid.value > 3 * iid.std_error);
}

TEST_CASE("verdicts") {
  auto q = make_measure("uniform scale=0.5");
  criterion_estimate e;
  e.value = std::log(2.0L) - 0.3L;
  e.std_error = 0.01L;
  e.upper_bias_bound = 0.001L;
  auto at_s = condensation_verdict(0.5L, *q, e);
  CHECK(at_s.verdict == verdict_kind::no_condensation);
  CHECK(at_s.sufficient_only);
  e.value = std::log(2.0L) + 0.3L;
  CHECK(condensation_verdict(0.5L, *q, e).verdict == verdict_kind::boundary_inconclusive);
  // h = 0.9: statistic = value + ln 0.9
  e.value = -std::log(0.9L) + 0.2L;
  CHECK(condensation_verdict(0.9L, *q, e).verdict == verdict_kind::condensation);
  e.value = -std::log(0.9L) - 0.2L;
  CHECK(condensation_verdict(0.9L, *q, e).verdict == verdict_kind::no_condensation);
  e.value = -std::log(0.9L);
  CHECK(condensation_verdict(0.9L, *q, e).verdict == verdict_kind::boundary_inconclusive);
  CHECK_THROWS_AS(condensation_verdict(0.4L, *q, e), precondition_error);
  CHECK(to_string(verdict_kind::no_condensation) == "no_condensation");
}

TEST_CASE("equilibrium on a constant path reproduces the deterministic equilibrium") {
  auto q = make_measure("uniform");
  auto eq = equilibrium_on_path(mutation_path(std::vector<real>(400, 0.5L)), q, 200);
  auto king = solve_kingman(q, 0.5L);
  for (int k = 1; k <= 4; ++k) CHECK(std::fabs(mixture_moment(eq.measure, k) - king.moment(k)) < 1e-6L);
  CHECK(std::fabs(eq.measure.condensate) < 1e-6L);

  auto qc = make_measure("poly_decay p=2");
  auto ec = equilibrium_on_path(mutation_path(std::vector<real>(256, 0.5L)), qc, 128);
  CHECK(std::fabs(ec.measure.condensate - 0.25L) <= ec.residual + 1e-4L);
  CHECK_THROWS_AS(equilibrium_on_path(mutation_path(std::vector<real>(10, 0.5L)), qc, 128), precondition_error);
}

TEST_CASE("condensate through the k-limit") {
  auto qc = make_measure("poly_decay p=2");
  auto lim = condensate_via_k_limit(mutation_path(std::vector<real>(2048, 0.5L)), *qc, 256);
  CHECK(std::fabs(lim.value - 0.25L) < 1e-6L);
  CHECK(lim.error < 1e-6L);

  // interior regime: no condensate
  auto q = make_measure("uniform");
  auto none = condensate_via_k_limit(mutation_path(std::vector<real>(1024, 0.5L)), *q, 256);
  CHECK(std::fabs(none.value) <= none.error + 1e-6L);

  auto qa = make_measure("atomic [(0.5,0.5),(1,0.5)]");
  CHECK_THROWS_AS(condensate_via_k_limit(mutation_path(std::vector<real>(64, 0.5L)), *qa, 32), precondition_error);
  CHECK_THROWS_AS(condensate_via_k_limit(mutation_path(std::vector<real>(16, 0.5L)), *qc, 32), precondition_error);
}

TEST_CASE("first model: strict moment gaps for a nondegenerate law") {
  auto q = make_measure("poly_decay p=2");
  auto law = mutation_law::two_point(0.3L, 0.9L, 0.5L);
  auto s = summarize_first_model(law, q, {1, 2, 3}, small_opts(600, 4), true);
  auto king = solve_kingman(q, law.mean());
  for (int i = 0; i < 3; ++i) {
    real gap = king.moment(i + 1) - s.moment_mean[i];
    CHECK(gap > 3 * s.moment_se[i] + s.moment_bias[i]);
  }
  CHECK(s.routes_consistent);
  CHECK(s.unconverged == 0);
  CHECK(s.eq20_mean < king.condensate);
}

TEST_CASE("degenerate comparison has zero gaps") {
  auto q = make_measure("poly_decay p=2");
  auto rep = compare_models(mutation_law::degenerate(0.5L), q, {1, 2}, small_opts(50));
  CHECK_FALSE(rep.any_violation);
  for (auto& r : rep.rows)
    if (r.model == "first_minus_kingman" || r.model == "gap") CHECK(std::fabs(r.estimate) < 1e-12L);
}

TEST_CASE("second model against Kingman at the first moment") {
  auto q = make_measure("poly_decay p=2");
  // A(0.3) is condensed with mass 0.55, A(0.7) is interior: E[A] = 0.275 >= K(0.5) = 0.25
  auto law = mutation_law::two_point(0.3L, 0.7L, 0.5L);
  auto s = summarize_second_model(law, q, {1}, small_opts(4000, 8));
  CHECK(std::fabs(s.condensate_mean - 0.275L) < 4 * s.condensate_se);
  CHECK(s.condensate_mean - kingman_condensate(*q, 0.5L) > 3 * s.condensate_se);
  CHECK(std::isfinite(static_cast<double>(second_vs_kingman_first_moment_gap(law, *q))));
}

TEST_CASE("curvature laws: the concave region is empty for uniform Q") {
  std::vector<real> grid;
  for (int i = 1; i < 20; ++i) grid.push_back(i / 20.0L);
  auto laws = laws_from_curvature(theta_curvature_scan(grid), 0.02L);
  CHECK_FALSE(laws.convex_region.empty());
  CHECK(laws.concave_region.empty());
  auto q = make_measure("uniform");
  for (auto& l : laws.convex_region) CHECK(second_vs_kingman_first_moment_gap(l, *q) > 0);
}

TEST_CASE("exchangeable inequality: closed forms") {
  auto uni = mutation_law::beta_law(1, 1, 1, true);
  auto r = exchangeable_inequality_check(parse_quadratic_form("neg_square_sum"), uni, 3, 20000, 1);
  CHECK(std::fabs(r.exact_lhs + 2.5L) < 1e-12L);
  CHECK(std::fabs(r.exact_rhs + 3) < 1e-12L);
  CHECK(r.holds);
  CHECK(std::fabs(r.margin - 0.5L) < 5 * r.margin_se);

  auto lin = exchangeable_inequality_check(parse_quadratic_form("linear d=2"), uni, 4, 1000, 2);
  CHECK(std::fabs(lin.exact_lhs - lin.exact_rhs) < 1e-15L);
  CHECK(std::fabs(lin.margin) < 5 * lin.margin_se);
  CHECK(lin.holds);

  // Bernoulli(p): enumerate all 2^n outcomes of -sum_{i<j} x_i x_j
  real p = 0.3L;
  int n = 5;
  auto bern = mutation_law::discrete({{0, 1 - p}, {1, p}}, true);
  real want = 0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    int ones = __builtin_popcount(mask);
    real prob = std::pow(p, static_cast<real>(ones)) * std::pow(1 - p, static_cast<real>(n - ones));
    want += prob * -(ones * (ones - 1) / 2.0L);
  }
  auto br = exchangeable_inequality_check(parse_quadratic_form("neg_pairwise"), bern, n, 5000, 3);
  CHECK(std::fabs(br.exact_lhs - want) < 1e-15L);
  CHECK(std::fabs(br.exact_rhs - -(n * (n - 1) / 2.0L) * p) < 1e-15L);
  CHECK(br.holds);

  CHECK_THROWS_AS(parse_quadratic_form("quadratic a=1 c=0.5"), config_error);
  CHECK_THROWS_AS(exchangeable_inequality_check(parse_quadratic_form("neg_pairwise"), bern, 1, 10, 1), config_error);
}

TEST_CASE("tiny b: theta tends to S_Q and the root stays resolved") {
  auto q = make_measure("uniform");
  for (real b : {1e-3L, 1e-5L, 1e-8L}) {
    real th = solve_theta(*q, b);
    CHECK(th < 1);
    CHECK(th > 1 - b);
    // b J_0(z) = 1 for uniform Q is z = 1 - exp(-z/b); iterate to the fixed point
    real z = 1;
    for (int i = 0; i < 50; ++i) z = -std::expm1(-z / b);
    CHECK(std::fabs(th - (1 - b) / z) < 1e-15L);
  }
}

TEST_CASE("results do not depend on the thread count") {
  auto q = make_measure("uniform");
  auto law = mutation_law::beta_law(2, 3, 0.95L);
  mc_options a = small_opts(500, 42), b = a;
  b.threads = 3;
  auto ia = estimate_iid_criterion(law, *q, a), ib = estimate_iid_criterion(law, *q, b);
  CHECK(ia.value == ib.value);
  CHECK(ia.std_error == ib.std_error);
  auto sa = estimate_shared_criterion(law, *q, a), sb = estimate_shared_criterion(law, *q, b);
  CHECK(sa.value == sb.value);
  auto qc = make_measure("poly_decay p=2");
  a.samples = b.samples = 60;
  CHECK(comparison_csv(compare_models(law, qc, {1, 2}, a)) == comparison_csv(compare_models(law, qc, {1, 2}, b)));
}
