#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoc/core.hpp"

namespace hoc {

inline constexpr int default_k_max = 512;

enum class family { atomic, beta, moments };

struct atom {
  real x;
  real w;
};

// Mutant distribution Q on [0,1], held through its moments.
//
// Every family is stored on the normalized scale u = x / s_q, so mu(k) = m_k / s_q^k
// stays in (0,1] for all k. Moments up to the cache size are computed once at
// construction; later calls are read-only.
class moment_sequence {
 public:
  static moment_sequence uniform(real scale = 1);
  // density (p+1)(1-x)^p
  static moment_sequence poly_decay(real p, real scale = 1);
  static moment_sequence beta(real a, real b, real scale = 1);
  static moment_sequence atomic(std::vector<atom> points);
  // explicit m_0..m_K with s_q supplied by the caller; nothing beyond K is known
  static moment_sequence from_moments(std::vector<real> m, real s_q, bool atom_at_sq);

  family kind() const { return kind_; }
  real s_q() const { return s_q_; }
  bool atom_at_sq() const { return atom_at_sq_; }
  int cache_size() const { return static_cast<int>(mu_.size()); }

  real moment(int k) const;
  real mu(int k) const;
  // Fills out[0..K] with mu_0..mu_K.
  void mu_range(int K, std::vector<real>& out) const;

  // J_k(z) = int u^k Qbar(du) / (1 - z u) for z in [0,1], where Qbar is Q on the
  // normalized scale. Returns +inf when the integral diverges.
  real resolvent(int k, real z) const;

  const std::vector<atom>& atoms() const { return atoms_; }
  real beta_a() const { return a_; }
  real beta_b() const { return b_; }

  // canonical spec string, parseable by parse_q_spec
  std::string describe() const;

 private:
  moment_sequence() = default;
  void fill_cache(int K);
  real mu_direct(int k) const;

  family kind_ = family::atomic;
  real s_q_ = 1;
  bool atom_at_sq_ = false;
  real a_ = 1, b_ = 1;
  bool poly_ = false;
  std::vector<atom> atoms_;  // normalized positions u in [0,1]
  std::vector<real> mu_;
};

using measure_ptr = std::shared_ptr<const moment_sequence>;

// `uniform`, `poly_decay p=2`, `beta a=2 b=3`, `atomic [(x1,w1),(x2,w2)]`,
// `moments s=1 atom=0 [m0,m1,...]`; parametric families accept `scale=s`.
moment_sequence parse_q_spec(const std::string& spec);
measure_ptr make_measure(const std::string& spec);
measure_ptr share(moment_sequence q);

real moment(const moment_sequence& q, int k);
// int y^k Q^l(dy) = m_{l+k} / m_l
real size_biased_moment(const moment_sequence& q, int l, int k);

struct holder_report {
  bool ok = true;
  int index = -1;
  std::string what;
};

// Checks m_0 = 1, strict decrease of m_k and the strict chain
// m_{j+1}/m_{j+2} < m_j/m_{j+1} < 1/m_1 for 1 <= j <= K.
holder_report check_holder_chain(const moment_sequence& q, int K);

// ---------------------------------------------------------------- mixtures

// condensate * delta_h + sum_l coeffs[l] * Q^l, plus mass dropped by truncation.
struct mixture_measure {
  real h = 1;
  real condensate = 0;
  std::vector<real> coeffs;
  real unresolved = 0;
  measure_ptr basis;

  real total_mass() const;
};

mixture_measure basis_measure(measure_ptr q, real h, int l = 0);
mixture_measure condensate_measure(measure_ptr q, real h);

real mixture_moment(const mixture_measure& p, int k);

// Drops coefficients below rel * max into `unresolved`.
void truncate_coeffs(mixture_measure& p, real rel = 1e-16L);

struct atomic_measure {
  std::vector<real> x;  // strictly increasing
  std::vector<real> w;

  real total_mass() const;
  real moment(int k) const;
};

// Requires an atomic basis.
atomic_measure to_atomic(const mixture_measure& p);
atomic_measure to_atomic(const moment_sequence& q);
real tv_distance(const atomic_measure& a, const atomic_measure& b);
real tv_distance_atomic(const mixture_measure& p1, const mixture_measure& p2);

// Stochastic order p1 <= p2. Atomic: CDF comparison on the union grid.
// Otherwise the first `k_check` moments are compared.
bool stochastically_below(const mixture_measure& p1, const mixture_measure& p2, real tol = 1e-14L,
                          int k_check = 64);

nlohmann::json to_json(const mixture_measure& p);
mixture_measure mixture_from_json(const nlohmann::json& j);

}  // namespace hoc
