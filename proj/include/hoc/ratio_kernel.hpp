#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hoc/iteration.hpp"
#include "hoc/measure.hpp"

namespace hoc {

// Terminal of the backward recursion: P_n^n = Q or P_n^n = delta_{S_Q}.
enum class terminal_kind { q, delta };

// Finite-n ratio arrays on the normalized scale:
//   r(j,k) = R^n_{j,k} / S^k,  g(j) = S gamma_j L_{j,n},  ell(j) = S L_{j,n}.
// Rows j = 1..n+1; columns k = 0..k_max.
struct ratio_state {
  int n = 0;
  int k_max = 0;
  terminal_kind term = terminal_kind::q;
  real s = 1;
  std::vector<real> rs;   // (n+1) x (k_max+1)
  std::vector<real> gs;   // index 1..n
  std::vector<real> ls;   // index 1..n+1
  std::vector<real> mu;   // mu_0..mu_{n+2}

  real r(int j, int k) const { return rs[(j - 1) * (k_max + 1) + k]; }
  real g(int j) const { return gs[j]; }
  real ell(int j) const { return ls[j]; }

  real R(int j, int k) const;
  real gamma_L(int j) const { return gs[j] / s; }
  real L(int j) const { return ls[j] / s; }

  // (prod_{i<l} gamma_{j+i} L_{j+i}) L_{j+l} m_{l+1}, for j+l <= n+1
  real phi(int j, int l) const;
  // mass of delta_{S_Q} in x P_{j-1}^n / int y P_{j-1}^n; zero for the Q terminal
  real atom(int j) const;

  std::string debug_csv() const;
};

// Backward induction from the terminal row. Cost O(n (n + k_max)).
ratio_state ratio_table(const moment_sequence& q, const mutation_path& path, int k_max,
                        terminal_kind term = terminal_kind::q);

// Fast path for Monte Carlo: returns g(1), and r(2,k) for k = 1..k_max in r2 (if given).
real first_row_g(const real* b, int n, terminal_kind term, const std::vector<real>& mu,
                 std::vector<real>& work, int k_max = 0, std::vector<real>* r2 = nullptr);

struct limit_options {
  real tol = 1e-10L;
  int row = 1;
  int k_max = 1;
  int n_start = 16;
  int n_max = 4096;
};

// Monotone brackets of the n -> infinity limits for one row. The Q terminal gives
// gamma L from above and R from below; the delta_{S_Q} terminal gives the other side.
struct limit_result {
  int n = 0;
  bool converged = false;
  bool inverted = false;  // the two terminals disagree in the wrong direction
  real change = 0;        // last doubling change of the Q-terminal gamma L
  real gl_upper = 0, gl_lower = 0;
  std::vector<real> r_lower, r_upper;  // k = 0..k_max

  real gamma_L() const { return gl_upper; }
  real width() const { return gl_upper - gl_lower; }
};

// b_of(j) must be defined for every j >= 1 and not depend on how many values are requested.
limit_result limits(const moment_sequence& q, const std::function<real(int)>& b_of, const limit_options& opt = {});

// ln Psi_n = sum_{j=1}^{n} ln(gamma_j L_{j,n}) - ln m_1 (every gamma_j finite).
real log_psi(const moment_sequence& q, const mutation_path& path);

// ---------------------------------------------------------------- type (*) matrices

struct typestar_matrix {
  int n = 0;
  std::vector<real> a;  // row-major

  typestar_matrix() = default;
  explicit typestar_matrix(int size) : n(size), a(static_cast<size_t>(size) * size, 0) {}
  real& operator()(int i, int j) { return a[(i - 1) * n + (j - 1)]; }
  real operator()(int i, int j) const { return a[(i - 1) * n + (j - 1)]; }
};

bool is_typestar(const typestar_matrix& m);
// M(i,j): rows and columns i..j
typestar_matrix submatrix(const typestar_matrix& m, int i, int j);

// Sum over increasing index paths of d_M(e); size at most 20.
real typestar_det(const typestar_matrix& m);
// The same sum restricted to paths that visit `node`.
real typestar_det_through(const typestar_matrix& m, int node);
// Gaussian elimination with partial pivoting; any square matrix.
real elimination_det(const typestar_matrix& m);

// W^{j,n} for the path (finite gammas), of size n-j+2; W^{n+1,n} = (m_1), W^{m,n} = (1) for m > n+1.
typestar_matrix w_matrix(const moment_sequence& q, const std::vector<real>& gamma, int j, int n);
// W^{j,n} with its first row replaced by m_{k+1}, m_{k+2}, ...
typestar_matrix u_matrix(const moment_sequence& q, const std::vector<real>& gamma, int j, int n, int k);
std::vector<real> gammas(const mutation_path& path);

// ---------------------------------------------------------------- derivative checks

struct derivative_check {
  std::string name;
  int i = 0, j = 0;
  real value = 0;
  real margin = 0;    // distance to the violated side of the bound
  real fd_error = 0;  // truncation plus rounding estimate
  bool passed = false;
};

struct derivative_report {
  std::vector<derivative_check> checks;
  bool all_passed = true;
  real min_ratio = real_inf;  // min margin / fd_error
};

// Finite-difference verification, on |W^n| and the ratio table, of:
// the logarithmic derivative bound of |W^n| in gamma_j, positive mixed partials of
// ln|W^n|, concavity of ln Psi_n, the monotonicity of gamma_i L_{i,n} and the
// decrease and concavity of R^n_{1,k}. Central differences with one Richardson step (second
// differences on 100 x step);
// a check passes when its margin exceeds 10 x the error estimate.
derivative_report derivative_checks(const moment_sequence& q, const mutation_path& path, int k, real step = 1e-5L);

}  // namespace hoc
