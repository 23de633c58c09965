#pragma once

#include <vector>

#include "hoc/measure.hpp"

namespace hoc {

// b_1..b_n, stored 0-based: b[j-1] = b_j.
struct mutation_path {
  std::vector<real> b;

  mutation_path() = default;
  explicit mutation_path(std::vector<real> bs);

  int size() const { return static_cast<int>(b.size()); }
  // 1-based accessors
  real b_at(int j) const { return b[j - 1]; }
  odds gamma(int j) const { return odds::from_b(b[j - 1]); }
  mutation_path prefix(int n) const;
};

// P' = (1-b) x P / int y P + b Q
mixture_measure forward_step(const mixture_measure& p, real b);

// P_n^n, P_{n-1}^n, ..., P_0^n with P_j^n = forward_step(P_{j+1}^n, b_{j+1}).
std::vector<mixture_measure> backward_sequence(const mutation_path& path, const mixture_measure& terminal);

// Forward model P_1, ..., P_n from P_0 with P_j = forward_step(P_{j-1}, b_j).
std::vector<mixture_measure> forward_sequence(const mutation_path& path, const mixture_measure& p0);

// Pointwise iteration on a finite support; the oracle for the mixture iterator.
atomic_measure atomic_iterate(const atomic_measure& p0, const mutation_path& path, const moment_sequence& q);
atomic_measure atomic_step(const atomic_measure& p, real b, const atomic_measure& q);

// Rows j = 0..n of C^n_{j,l}, l = 0..n-j, with terminal P_n^n = Q.
std::vector<std::vector<real>> coefficient_expansion(const moment_sequence& q, const mutation_path& path);

}  // namespace hoc
