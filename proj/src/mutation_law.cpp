#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "hoc/format.hpp"
#include "hoc/quadrature.hpp"
#include "hoc/random_models.hpp"

namespace hoc {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

rng_stream::rng_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
    : key_(splitmix(splitmix(splitmix(seed) ^ tag) ^ index)) {}

rng_stream::result_type rng_stream::operator()() { return splitmix(key_ + 0x632be59bd9b4e019ULL * ++ctr_); }

real rng_stream::uniform() { return std::ldexp(static_cast<real>((*this)()), -64); }

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max(count, 1));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      (void)t;
      while (!failed) {
        int i = next.fetch_add(1);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------- mutation laws

namespace {

void check_support(real b, bool allow_one) {
  bool ok = allow_one ? (b >= 0 && b <= 1) : (b >= 0 && b < 1);
  if (!ok) throw config_error("mutation probability " + format_real(b) + " outside [0,1)");
}

}  // namespace

mutation_law mutation_law::degenerate(real b) {
  check_support(b, false);
  return discrete({{b, 1}});
}

mutation_law mutation_law::two_point(real b1, real b2, real p) {
  if (!(p > 0 && p < 1)) throw config_error("two_point needs 0 < p < 1");
  mutation_law l = discrete({{b1, p}, {b2, 1 - p}});
  if (l.atoms_.size() == 2) l.kind_ = law_kind::two_point;
  return l;
}

mutation_law mutation_law::discrete(std::vector<std::pair<real, real>> atoms, bool allow_one) {
  if (atoms.empty()) throw config_error("discrete law needs at least one atom");
  real total = 0;
  for (auto& [b, p] : atoms) {
    check_support(b, allow_one);
    if (!(p >= 0)) throw config_error("discrete law weights must be nonnegative");
    total += p;
  }
  if (std::fabs(total - 1) > 1e-12L) throw config_error("discrete law weights sum to " + format_real(total));
  std::stable_sort(atoms.begin(), atoms.end(), [](auto& x, auto& y) { return x.first < y.first; });
  mutation_law l;
  for (auto& [b, p] : atoms) {
    if (p == 0) continue;
    if (!l.atoms_.empty() && l.atoms_.back().first == b)
      l.atoms_.back().second += p / total;
    else
      l.atoms_.push_back({b, p / total});
  }
  l.kind_ = l.atoms_.size() == 1 ? law_kind::degenerate : law_kind::discrete;
  real c = 0;
  for (auto& a : l.atoms_) l.cdf_.push_back(c += a.second);
  l.cdf_.back() = 1;
  return l;
}

mutation_law mutation_law::beta_law(real a, real c, real scale, bool allow_one) {
  if (!(a > 0 && c > 0)) throw config_error("beta_law needs a > 0 and c > 0");
  if (!(scale > 0 && (allow_one ? scale <= 1 : scale < 1))) throw config_error("beta_law scale must lie in (0,1)");
  mutation_law l;
  l.kind_ = law_kind::beta_law;
  l.a_ = a;
  l.c_ = c;
  l.scale_ = scale;
  return l;
}

real mutation_law::mean() const {
  if (kind_ == law_kind::beta_law) return scale_ * a_ / (a_ + c_);
  real m = 0;
  for (auto& [b, p] : atoms_) m += b * p;
  return m;
}

bool mutation_law::is_degenerate() const { return kind_ == law_kind::degenerate; }

real mutation_law::sample(rng_stream& rng) const {
  if (kind_ == law_kind::beta_law) {
    std::gamma_distribution<double> ga(static_cast<double>(a_)), gc(static_cast<double>(c_));
    double x = ga(rng), y = gc(rng);
    return scale_ * static_cast<real>(x) / (static_cast<real>(x) + static_cast<real>(y));
  }
  if (atoms_.size() == 1) return atoms_[0].first;
  real u = rng.uniform();
  size_t i = std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
  return atoms_[std::min(i, atoms_.size() - 1)].first;
}

real mutation_law::expect(const std::function<real(real)>& f) const {
  if (kind_ != law_kind::beta_law) {
    real s = 0;
    for (auto& [b, p] : atoms_) s += p * f(b);
    return s;
  }
  real lnorm = std::lgamma(a_ + c_) - std::lgamma(a_) - std::lgamma(c_);
  return tanh_sinh([&](real u, real v) {
    if (u <= 0 || v <= 0) return real(0);
    return f(scale_ * u) * std::exp(lnorm + (a_ - 1) * std::log(u) + (c_ - 1) * std::log(v));
  });
}

std::string mutation_law::describe() const {
  switch (kind_) {
    case law_kind::degenerate:
      return "degenerate b=" + format_real(atoms_[0].first);
    case law_kind::two_point:
      return "two_point b1=" + format_real(atoms_[0].first) + " b2=" + format_real(atoms_[1].first) +
             " p=" + format_real(atoms_[0].second);
    case law_kind::discrete: {
      std::string s = "discrete [";
      for (size_t i = 0; i < atoms_.size(); ++i) {
        if (i) s += ',';
        s += '(' + format_real(atoms_[i].first) + ',' + format_real(atoms_[i].second) + ')';
      }
      return s + ']';
    }
    case law_kind::beta_law:
      return "beta_law a=" + format_real(a_) + " c=" + format_real(c_) + " scale=" + format_real(scale_);
  }
  return {};
}

mutation_law parse_mutation_law(const std::string& spec, bool allow_one) {
  family_spec f = parse_family_spec(spec);
  if (f.name == "degenerate") {
    f.allow_only({"b"});
    real b = f.get("b");
    check_support(b, allow_one);
    return mutation_law::discrete({{b, 1}}, allow_one);
  }
  if (f.name == "two_point") {
    f.allow_only({"b1", "b2", "p"});
    real b1 = f.get("b1"), b2 = f.get("b2"), p = f.get_or("p", 0.5L);
    if (!(p > 0 && p < 1)) throw config_error("two_point needs 0 < p < 1");
    check_support(b1, allow_one);
    check_support(b2, allow_one);
    if (b1 == b2) return mutation_law::discrete({{b1, 1}}, allow_one);
    return mutation_law::two_point(b1, b2, p);
  }
  if (f.name == "discrete") {
    f.allow_only({});
    if (!f.has_list) throw config_error("discrete law needs a list [(b,p),...]");
    std::vector<std::pair<real, real>> atoms;
    for (auto& t : f.list) {
      if (t.size() != 2) throw config_error("discrete law entries must be (b,p) pairs");
      atoms.push_back({t[0], t[1]});
    }
    return mutation_law::discrete(atoms, allow_one);
  }
  if (f.name == "beta_law") {
    f.allow_only({"a", "c", "scale"});
    return mutation_law::beta_law(f.get("a"), f.get("c"), f.get_or("scale", allow_one ? 1 : 0.99L), allow_one);
  }
  throw config_error("unknown mutation law '" + f.name + "'");
}

}  // namespace hoc
