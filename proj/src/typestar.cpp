#include <algorithm>
#include <cmath>

#include "hoc/ratio_kernel.hpp"

namespace hoc {

bool is_typestar(const typestar_matrix& m) {
  for (int i = 1; i <= m.n; ++i) {
    for (int j = 1; j <= m.n; ++j) {
      real v = m(i, j);
      if (i <= j && !(v > 0)) return false;
      if (i == j + 1 && !(v < 0)) return false;
      if (i > j + 1 && v != 0) return false;
    }
  }
  return true;
}

typestar_matrix submatrix(const typestar_matrix& m, int i, int j) {
  if (i < 1 || j > m.n || i > j) throw precondition_error("submatrix bounds out of range");
  typestar_matrix s(j - i + 1);
  for (int r = i; r <= j; ++r)
    for (int c = i; c <= j; ++c) s(r - i + 1, c - i + 1) = m(r, c);
  return s;
}

namespace {

constexpr int oracle_max = 20;

// d(M(a,b)) = M_{a,b} prod_{i=a+1}^{b} |M_{i,i-1}|
std::vector<real> block_terms(const typestar_matrix& m) {
  int n = m.n;
  std::vector<real> d(static_cast<size_t>(n + 1) * (n + 1), 0);
  for (int a = 1; a <= n; ++a) {
    real sub = 1;
    for (int b = a; b <= n; ++b) {
      if (b > a) sub *= std::fabs(m(b, b - 1));
      d[a * (n + 1) + b] = m(a, b) * sub;
    }
  }
  return d;
}

// Depth-first walk over e = (1 = e_1 < ... < e_k = n+1); each step from e_i to
// e_{i+1} contributes the block term of M(e_i, e_{i+1}-1).
real walk(const std::vector<real>& d, int n, int pos, real acc, int node) {
  real total = 0;
  for (int next = pos + 1; next <= n + 1; ++next) {
    if (node > pos && next > node) break;  // the path would skip the required node
    real t = acc * d[pos * (n + 1) + (next - 1)];
    if (next == n + 1)
      total += t;
    else
      total += walk(d, n, next, t, node);
  }
  return total;
}

void check_oracle(const typestar_matrix& m) {
  if (m.n < 1) throw precondition_error("empty matrix");
  if (m.n > oracle_max) throw oracle_size_error("path expansion is limited to size 20");
  if (!is_typestar(m)) throw precondition_error("matrix is not of type (*)");
}

}  // namespace

real typestar_det(const typestar_matrix& m) {
  check_oracle(m);
  return walk(block_terms(m), m.n, 1, 1, 0);
}

real typestar_det_through(const typestar_matrix& m, int node) {
  check_oracle(m);
  if (node < 1 || node > m.n + 1) throw precondition_error("path node out of range");
  return walk(block_terms(m), m.n, 1, 1, node);
}

real elimination_det(const typestar_matrix& m) {
  int n = m.n;
  std::vector<real> a = m.a;
  real det = 1;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(a[r * n + c]) > std::fabs(a[piv * n + c])) piv = r;
    if (a[piv * n + c] == 0) return 0;
    if (piv != c) {
      for (int k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      det = -det;
    }
    real p = a[c * n + c];
    det *= p;
    for (int r = c + 1; r < n; ++r) {
      real f = a[r * n + c] / p;
      if (f == 0) continue;
      for (int k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return det;
}

std::vector<real> gammas(const mutation_path& path) {
  std::vector<real> g;
  for (int j = 1; j <= path.size(); ++j) {
    odds o = path.gamma(j);
    if (o.infinite) throw unsupported_family("W matrices need finite gamma_j");
    g.push_back(o.value);
  }
  return g;
}

typestar_matrix u_matrix(const moment_sequence& q, const std::vector<real>& gamma, int j, int n, int k) {
  if (j > n + 1) {
    typestar_matrix one(1);
    one(1, 1) = k == 0 ? 1 : 0;
    return one;
  }
  int size = n - j + 2;
  typestar_matrix w(size);
  for (int c = 1; c <= size; ++c) w(1, c) = q.moment(c + k);
  for (int r = 2; r <= size; ++r) {
    w(r, r - 1) = -gamma[j + r - 2 - 1];
    for (int c = r; c <= size; ++c) w(r, c) = q.moment(c - r + 1);
  }
  return w;
}

typestar_matrix w_matrix(const moment_sequence& q, const std::vector<real>& gamma, int j, int n) {
  return u_matrix(q, gamma, j, n, 0);
}

}  // namespace hoc
