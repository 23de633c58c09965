#include "hoc/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hoc/format.hpp"
#include "hoc/quadrature.hpp"

namespace hoc {

// ---------------------------------------------------------------- construction

moment_sequence moment_sequence::beta(real a, real b, real scale) {
  if (!(a > 0) || !(b > 0)) throw config_error("beta family needs a > 0 and b > 0");
  if (!(scale > 0 && scale <= 1)) throw config_error("scale must lie in (0,1]");
  moment_sequence q;
  q.kind_ = family::beta;
  q.a_ = a;
  q.b_ = b;
  q.s_q_ = scale;
  q.atom_at_sq_ = false;
  q.fill_cache(default_k_max);
  return q;
}

moment_sequence moment_sequence::uniform(real scale) { return beta(1, 1, scale); }

moment_sequence moment_sequence::poly_decay(real p, real scale) {
  if (!(p >= 0)) throw config_error("poly_decay needs p >= 0");
  moment_sequence q = beta(1, p + 1, scale);
  q.poly_ = true;
  return q;
}

moment_sequence moment_sequence::atomic(std::vector<atom> points) {
  if (points.empty()) throw config_error("atomic measure needs at least one point");
  real total = 0;
  for (const auto& p : points) {
    if (!(p.x >= 0 && p.x <= 1)) throw config_error("atom positions must lie in [0,1]");
    if (!(p.w > 0)) throw config_error("atom weights must be positive");
    total += p.w;
  }
  if (std::fabs(total - 1) > 1e-12L) throw config_error("atom weights must sum to 1");
  std::sort(points.begin(), points.end(), [](const atom& l, const atom& r) { return l.x < r.x; });
  std::vector<atom> merged;
  for (const auto& p : points) {
    if (!merged.empty() && merged.back().x == p.x)
      merged.back().w += p.w;
    else
      merged.push_back(p);
  }
  moment_sequence q;
  q.kind_ = family::atomic;
  q.s_q_ = merged.back().x;
  if (!(q.s_q_ > 0)) throw config_error("Q = delta_0 is excluded");
  q.atom_at_sq_ = true;
  for (auto& p : merged) q.atoms_.push_back({p.x / q.s_q_, p.w / total});
  q.atoms_.back().x = 1;
  q.fill_cache(default_k_max);
  return q;
}

moment_sequence moment_sequence::from_moments(std::vector<real> m, real s_q, bool atom_at_sq) {
  if (m.size() < 2) throw config_error("explicit moment list needs m_0 and m_1 at least");
  if (!(s_q > 0 && s_q <= 1)) throw config_error("s_q must lie in (0,1]");
  moment_sequence q;
  q.kind_ = family::moments;
  q.s_q_ = s_q;
  q.atom_at_sq_ = atom_at_sq;
  q.mu_.resize(m.size());
  real sk = 1;
  for (size_t k = 0; k < m.size(); ++k) {
    q.mu_[k] = m[k] / sk;
    sk *= s_q;
  }
  return q;
}

void moment_sequence::fill_cache(int K) {
  mu_.assign(K + 1, 0);
  if (kind_ == family::beta) {
    mu_[0] = 1;
    for (int k = 1; k <= K; ++k) mu_[k] = mu_[k - 1] * (a_ + k - 1) / (a_ + b_ + k - 1);
  } else {
    std::vector<real> pw(atoms_.size(), 1);
    for (int k = 0; k <= K; ++k) {
      real s = 0;
      for (size_t i = 0; i < atoms_.size(); ++i) {
        s += atoms_[i].w * pw[i];
        pw[i] *= atoms_[i].x;
      }
      mu_[k] = s;
    }
  }
}

// ---------------------------------------------------------------- moments

real moment_sequence::mu_direct(int k) const {
  switch (kind_) {
    case family::atomic: {
      real s = 0;
      for (const auto& p : atoms_) s += p.w * std::pow(p.x, static_cast<real>(k));
      return s;
    }
    case family::beta: {
      int k0 = cache_size() - 1;
      real v = mu_[k0];
      for (int i = k0 + 1; i <= k; ++i) v *= (a_ + i - 1) / (a_ + b_ + i - 1);
      return v;
    }
    case family::moments:
      break;
  }
  throw unsupported_family("moment m_" + std::to_string(k) + " is beyond the supplied moment list");
}

real moment_sequence::mu(int k) const {
  if (k < 0) throw precondition_error("moment order must be >= 0");
  if (k < cache_size()) return mu_[k];
  return mu_direct(k);
}

real moment_sequence::moment(int k) const { return mu(k) * std::pow(s_q_, static_cast<real>(k)); }

void moment_sequence::mu_range(int K, std::vector<real>& out) const {
  out.resize(K + 1);
  int c = std::min(K + 1, cache_size());
  std::copy(mu_.begin(), mu_.begin() + c, out.begin());
  if (c > K) return;
  if (kind_ == family::beta) {
    for (int k = c; k <= K; ++k) out[k] = out[k - 1] * (a_ + k - 1) / (a_ + b_ + k - 1);
  } else {
    for (int k = c; k <= K; ++k) out[k] = mu_direct(k);
  }
}

real moment(const moment_sequence& q, int k) { return q.moment(k); }

real size_biased_moment(const moment_sequence& q, int l, int k) {
  if (l < 0 || k < 0) throw precondition_error("size-biasing order and moment order must be >= 0");
  return q.mu(l + k) / q.mu(l) * std::pow(q.s_q(), static_cast<real>(k));
}

// ---------------------------------------------------------------- resolvent

namespace {

// int_0^1 v^p / (c+v) dv for integer p >= 0 and c > 0
real poly_resolvent_kernel(int p, real c, real log_term) {
  real s = 0;
  real pw = 1;
  for (int i = 0; i < p; ++i) {
    s += pw / (p - i);
    pw *= -c;
  }
  return s + pw * log_term;
}

}  // namespace

real moment_sequence::resolvent(int k, real z) const {
  if (k < 0) throw precondition_error("moment order must be >= 0");
  if (!(z >= 0 && z <= 1)) throw precondition_error("resolvent argument must lie in [0,1]");
  if (z == 0) return mu(k);

  if (kind_ == family::atomic) {
    real s = 0;
    for (const auto& p : atoms_) {
      if (z == 1 && p.x == 1) return real_inf;
      s += p.w * std::pow(p.x, static_cast<real>(k)) / ((1 - z) + z * (1 - p.x));
    }
    return s;
  }

  if (kind_ == family::beta && z == 1) {
    if (b_ <= 1) return real_inf;
    // B(a+k, b-1) / B(a, b)
    real v = (a_ + b_ - 1) / (b_ - 1);
    for (int i = 0; i < k; ++i) v *= (a_ + i) / (a_ + b_ - 1 + i);
    return v;
  }

  if (z <= 0.5L) {
    real s = 0;
    real zi = 1;
    for (int i = 0; i < 4000; ++i) {
      real term = zi * mu(k + i);
      s += term;
      if (term <= real_eps * s * 1e-2L) return s;
      zi *= z;
    }
    return s;
  }

  if (kind_ == family::moments) {
    if (z == 1 && atom_at_sq_) return real_inf;
    // the series is all that is available
    real s = 0;
    real zi = 1;
    for (int i = 0; k + i < cache_size(); ++i) {
      real term = zi * mu_[k + i];
      s += term;
      if (term <= real_eps * s) return s;
      zi *= z;
    }
    throw unsupported_family("resolvent series does not converge within the supplied moments");
  }

  // Beta(1, p+1) with small integer p: closed form, then the upward recurrence
  // J_k = (J_{k-1} - mu_{k-1}) / z.
  real p_real = b_ - 1;
  if (a_ == 1 && p_real == std::floor(p_real) && p_real <= 8 && k <= 16) {
    int p = static_cast<int>(p_real);
    real c = (1 - z) / z;
    real log_term = -std::log1p(-z);
    real j = (p + 1) / z * poly_resolvent_kernel(p, c, log_term);
    for (int i = 1; i <= k; ++i) j = (j - mu(i - 1)) / z;
    return j;
  }

  real log_beta = std::lgamma(a_) + std::lgamma(b_) - std::lgamma(a_ + b_);
  real a = a_, b = b_;
  return tanh_sinh([&](real u, real v) {
    if (u <= 0 || v <= 0) return static_cast<real>(0);
    real dens = std::exp((k + a - 1) * std::log(u) + (b - 1) * std::log(v) - log_beta);
    return dens / ((1 - z) + z * v);
  });
}

// ---------------------------------------------------------------- grammar

std::string moment_sequence::describe() const {
  auto scale = [&]() { return s_q_ == 1 ? std::string() : " scale=" + format_real(s_q_); };
  switch (kind_) {
    case family::beta:
      if (a_ == 1 && b_ == 1) return "uniform" + scale();
      if (poly_) return "poly_decay p=" + format_real(b_ - 1) + scale();
      return "beta a=" + format_real(a_) + " b=" + format_real(b_) + scale();
    case family::atomic: {
      std::string s = "atomic [";
      for (size_t i = 0; i < atoms_.size(); ++i) {
        if (i) s += ",";
        s += "(" + format_real(atoms_[i].x * s_q_) + "," + format_real(atoms_[i].w) + ")";
      }
      return s + "]";
    }
    case family::moments: {
      std::string s = "moments s=" + format_real(s_q_) + " atom=" + (atom_at_sq_ ? "1" : "0") + " [";
      real sk = 1;
      for (size_t i = 0; i < mu_.size(); ++i) {
        if (i) s += ",";
        s += format_real(mu_[i] * sk);
        sk *= s_q_;
      }
      return s + "]";
    }
  }
  return "";
}

moment_sequence parse_q_spec(const std::string& spec) {
  family_spec f = parse_family_spec(spec);
  if (f.name == "uniform") {
    f.allow_only({"scale"});
    return moment_sequence::uniform(f.get_or("scale", 1));
  }
  if (f.name == "poly_decay") {
    f.allow_only({"p", "scale"});
    return moment_sequence::poly_decay(f.get("p"), f.get_or("scale", 1));
  }
  if (f.name == "beta") {
    f.allow_only({"a", "b", "scale"});
    return moment_sequence::beta(f.get("a"), f.get("b"), f.get_or("scale", 1));
  }
  if (f.name == "atomic") {
    f.allow_only({});
    if (!f.has_list) throw config_error("atomic needs a list [(x,w),...]");
    std::vector<atom> pts;
    for (const auto& t : f.list) {
      if (t.size() != 2) throw config_error("atomic list entries must be (x,w) pairs");
      pts.push_back({t[0], t[1]});
    }
    return moment_sequence::atomic(std::move(pts));
  }
  if (f.name == "moments") {
    f.allow_only({"s", "atom"});
    if (!f.has_list) throw config_error("moments needs a list [m0,m1,...]");
    std::vector<real> m;
    for (const auto& t : f.list) {
      if (t.size() != 1) throw config_error("moments list entries must be plain numbers");
      m.push_back(t[0]);
    }
    return moment_sequence::from_moments(std::move(m), f.get("s"), f.get_or("atom", 0) != 0);
  }
  throw unsupported_family("unknown mutant distribution family '" + f.name + "'");
}

measure_ptr share(moment_sequence q) { return std::make_shared<const moment_sequence>(std::move(q)); }

measure_ptr make_measure(const std::string& spec) { return share(parse_q_spec(spec)); }

holder_report check_holder_chain(const moment_sequence& q, int K) {
  holder_report r;
  auto fail = [&](int j, std::string what) {
    r.ok = false;
    r.index = j;
    r.what = std::move(what);
    return r;
  };
  if (std::fabs(q.mu(0) - 1) > 1e-14L) return fail(0, "m_0 = 1");
  for (int k = 1; k <= K + 2; ++k) {
    if (!(q.mu(k) > 0)) return fail(k, "m_k > 0");
    if (!(q.moment(k) < q.moment(k - 1)) && k > 1) return fail(k, "m_k strictly decreasing");
  }
  // compare cross products to avoid division
  real m1 = q.moment(1);
  for (int j = 1; j <= K; ++j) {
    real a = q.mu(j), b = q.mu(j + 1), c = q.mu(j + 2);
    // m_{j+1}/m_{j+2} < m_j/m_{j+1}  <=>  m_{j+1}^2 < m_j m_{j+2}
    if (!(b * b < a * c)) return fail(j, "holder chain m_{j+1}/m_{j+2} < m_j/m_{j+1}");
    // m_j/m_{j+1} < 1/m_1  <=>  m_1 m_j < m_{j+1}
    if (!(m1 * q.moment(j) < q.moment(j + 1))) return fail(j, "holder chain m_j/m_{j+1} < 1/m_1");
  }
  return r;
}

// ---------------------------------------------------------------- mixtures

real mixture_measure::total_mass() const {
  real s = condensate + unresolved;
  for (real c : coeffs) s += c;
  return s;
}

mixture_measure basis_measure(measure_ptr q, real h, int l) {
  mixture_measure p;
  p.h = h;
  p.basis = std::move(q);
  p.coeffs.assign(l + 1, 0);
  p.coeffs[l] = 1;
  return p;
}

mixture_measure condensate_measure(measure_ptr q, real h) {
  mixture_measure p;
  p.h = h;
  p.basis = std::move(q);
  p.condensate = 1;
  return p;
}

real mixture_moment(const mixture_measure& p, int k) {
  if (k < 0) throw precondition_error("moment order must be >= 0");
  const moment_sequence& q = *p.basis;
  real sk = std::pow(q.s_q(), static_cast<real>(k));
  real s = p.condensate * std::pow(p.h, static_cast<real>(k));
  for (size_t l = 0; l < p.coeffs.size(); ++l) {
    if (p.coeffs[l] == 0) continue;
    s += p.coeffs[l] * q.mu(static_cast<int>(l) + k) / q.mu(static_cast<int>(l)) * sk;
  }
  return s;
}

void truncate_coeffs(mixture_measure& p, real rel) {
  real mx = 0;
  for (real c : p.coeffs) mx = std::max(mx, c);
  for (real& c : p.coeffs) {
    if (c < rel * mx) {
      p.unresolved += c;
      c = 0;
    }
  }
  while (!p.coeffs.empty() && p.coeffs.back() == 0) p.coeffs.pop_back();
}

real atomic_measure::total_mass() const { return std::accumulate(w.begin(), w.end(), static_cast<real>(0)); }

real atomic_measure::moment(int k) const {
  real s = 0;
  for (size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], static_cast<real>(k));
  return s;
}

atomic_measure to_atomic(const moment_sequence& q) {
  if (q.kind() != family::atomic) throw unsupported_family("measure is not atomic");
  atomic_measure a;
  for (const auto& p : q.atoms()) {
    a.x.push_back(p.x * q.s_q());
    a.w.push_back(p.w);
  }
  return a;
}

atomic_measure to_atomic(const mixture_measure& p) {
  const moment_sequence& q = *p.basis;
  if (q.kind() != family::atomic) throw unsupported_family("mixture basis is not atomic");
  atomic_measure a;
  const auto& pts = q.atoms();
  bool h_seen = false;
  for (const auto& pt : pts) {
    real w = 0;
    for (size_t l = 0; l < p.coeffs.size(); ++l) {
      if (p.coeffs[l] == 0) continue;
      w += p.coeffs[l] * pt.w * std::pow(pt.x, static_cast<real>(l)) / q.mu(static_cast<int>(l));
    }
    real x = pt.x * q.s_q();
    if (x == p.h) {
      w += p.condensate;
      h_seen = true;
    }
    a.x.push_back(x);
    a.w.push_back(w);
  }
  if (!h_seen && p.condensate > 0) {
    auto it = std::lower_bound(a.x.begin(), a.x.end(), p.h);
    size_t idx = it - a.x.begin();
    a.x.insert(a.x.begin() + idx, p.h);
    a.w.insert(a.w.begin() + idx, p.condensate);
  }
  return a;
}

real tv_distance(const atomic_measure& a, const atomic_measure& b) {
  size_t i = 0, j = 0;
  real s = 0;
  while (i < a.x.size() || j < b.x.size()) {
    if (j == b.x.size() || (i < a.x.size() && a.x[i] < b.x[j])) {
      s += std::fabs(a.w[i++]);
    } else if (i == a.x.size() || b.x[j] < a.x[i]) {
      s += std::fabs(b.w[j++]);
    } else {
      s += std::fabs(a.w[i++] - b.w[j++]);
    }
  }
  return s / 2;
}

real tv_distance_atomic(const mixture_measure& p1, const mixture_measure& p2) {
  if (!p1.basis || !p2.basis) throw incompatible_measure("mixture without basis");
  if (p1.basis != p2.basis && p1.basis->describe() != p2.basis->describe())
    throw incompatible_measure("mixtures are built on different bases");
  if (p1.h != p2.h) throw incompatible_measure("mixtures have different condensate positions");
  return tv_distance(to_atomic(p1), to_atomic(p2));
}

bool stochastically_below(const mixture_measure& p1, const mixture_measure& p2, real tol, int k_check) {
  if (p1.basis->kind() == family::atomic && p2.basis->kind() == family::atomic) {
    atomic_measure a = to_atomic(p1), b = to_atomic(p2);
    std::vector<real> grid = a.x;
    grid.insert(grid.end(), b.x.begin(), b.x.end());
    std::sort(grid.begin(), grid.end());
    real fa = 0, fb = 0;
    size_t i = 0, j = 0;
    for (real g : grid) {
      while (i < a.x.size() && a.x[i] <= g) fa += a.w[i++];
      while (j < b.x.size() && b.x[j] <= g) fb += b.w[j++];
      if (fa + tol < fb) return false;
    }
    return true;
  }
  for (int k = 1; k <= k_check; ++k) {
    real m1 = mixture_moment(p1, k), m2 = mixture_moment(p2, k);
    if (m1 > m2 * (1 + tol) + tol) return false;
  }
  return true;
}

nlohmann::json to_json(const mixture_measure& p) {
  nlohmann::json j;
  j["h"] = static_cast<double>(p.h);
  j["condensate"] = static_cast<double>(p.condensate);
  std::vector<double> c(p.coeffs.begin(), p.coeffs.end());
  j["coeffs"] = c;
  j["unresolved"] = static_cast<double>(p.unresolved);
  j["basis"] = p.basis ? p.basis->describe() : std::string();
  return j;
}

mixture_measure mixture_from_json(const nlohmann::json& j) {
  try {
    mixture_measure p;
    p.h = j.at("h").get<double>();
    p.condensate = j.at("condensate").get<double>();
    for (double c : j.at("coeffs")) p.coeffs.push_back(c);
    if (j.contains("unresolved")) p.unresolved = j.at("unresolved").get<double>();
    p.basis = make_measure(j.at("basis").get<std::string>());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("malformed mixture json: ") + e.what());
  }
}

}  // namespace hoc
