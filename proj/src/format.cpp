#include "hoc/format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace hoc {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_real(real x) { return format_real(static_cast<double>(x)); }

std::string trim(const std::string& s) {
  auto b = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  auto e = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return b < e ? std::string(b, e) : std::string();
}

real parse_real(const std::string& raw) {
  std::string s = trim(raw);
  if (s == "inf" || s == "+inf") return real_inf;
  if (s.empty()) throw config_error("expected a number, got an empty string");
  char* end = nullptr;
  real v = std::strtold(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw config_error("not a number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& raw) {
  std::string s = trim(raw);
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    // accept integral values written as 1e5
    real r = parse_real(s);
    if (r != std::floor(r) || std::fabs(r) > 9.0e18L) throw config_error("not an integer: '" + s + "'");
    return static_cast<long long>(r);
  }
  return v;
}

real family_spec::get(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw config_error("'" + name + "' needs parameter '" + key + "'");
  return parse_real(it->second);
}

real family_spec::get_or(const std::string& key, real fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : parse_real(it->second);
}

void family_spec::allow_only(const std::vector<std::string>& keys) const {
  for (const auto& [k, v] : params) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw config_error("'" + name + "' does not take parameter '" + k + "'");
  }
}

namespace {

std::vector<std::vector<real>> parse_list(const std::string& body) {
  std::vector<std::vector<real>> out;
  std::string s = trim(body);
  if (s.empty()) return out;
  if (s.find('(') == std::string::npos) {
    size_t pos = 0;
    while (pos <= s.size()) {
      size_t c = s.find(',', pos);
      std::string tok = s.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
      out.push_back({parse_real(tok)});
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    return out;
  }
  size_t pos = 0;
  while (true) {
    size_t open = s.find('(', pos);
    if (open == std::string::npos) break;
    size_t close = s.find(')', open);
    if (close == std::string::npos) throw config_error("unbalanced '(' in list");
    std::string inner = s.substr(open + 1, close - open - 1);
    std::vector<real> tup;
    size_t p = 0;
    while (true) {
      size_t c = inner.find(',', p);
      tup.push_back(parse_real(inner.substr(p, c == std::string::npos ? std::string::npos : c - p)));
      if (c == std::string::npos) break;
      p = c + 1;
    }
    out.push_back(std::move(tup));
    pos = close + 1;
    std::string rest = trim(s.substr(pos));
    if (!rest.empty() && rest[0] != ',') throw config_error("expected ',' between tuples");
  }
  return out;
}

}  // namespace

family_spec parse_family_spec(const std::string& raw) {
  family_spec f;
  std::string s = trim(raw);
  if (s.empty()) throw config_error("empty family spec");
  size_t lb = s.find('[');
  std::string head = s;
  if (lb != std::string::npos) {
    size_t rb = s.rfind(']');
    if (rb == std::string::npos || rb < lb) throw config_error("unbalanced '[' in '" + s + "'");
    if (!trim(s.substr(rb + 1)).empty()) throw config_error("trailing text after list in '" + s + "'");
    f.has_list = true;
    f.list = parse_list(s.substr(lb + 1, rb - lb - 1));
    head = s.substr(0, lb);
  }
  std::vector<std::string> toks;
  std::string cur;
  for (char c : head) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) toks.push_back(cur), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) toks.push_back(cur);
  if (toks.empty()) throw config_error("missing family name in '" + s + "'");
  f.name = toks[0];
  for (size_t i = 1; i < toks.size(); ++i) {
    size_t eq = toks[i].find('=');
    if (eq == std::string::npos || eq == 0) throw config_error("expected key=value, got '" + toks[i] + "'");
    f.params[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
  }
  return f;
}

}  // namespace hoc
