#pragma once

#include <map>
#include <string>
#include <vector>

#include "hoc/core.hpp"

namespace hoc {

// Shortest round-trip decimal of the value rounded to double. Locale independent.
std::string format_real(real x);
std::string format_real(double x);

// Parses a decimal number; the whole string must be consumed.
real parse_real(const std::string& s);
long long parse_int(const std::string& s);

std::string trim(const std::string& s);

// A family spec such as `beta a=2 b=3` or `atomic [(0.5,0.5),(1,0.5)]`.
struct family_spec {
  std::string name;
  std::map<std::string, std::string> params;
  bool has_list = false;
  // `[(a,b),(c,d)]` gives tuples {{a,b},{c,d}}; `[a,b,c]` gives one-element tuples
  std::vector<std::vector<real>> list;

  real get(const std::string& key) const;
  real get_or(const std::string& key, real fallback) const;
  void allow_only(const std::vector<std::string>& keys) const;
};

family_spec parse_family_spec(const std::string& spec);

}  // namespace hoc
