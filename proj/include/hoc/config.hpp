#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hoc/core.hpp"

namespace hoc {

struct run_config {
  std::string q_spec;
  std::string beta_spec;  // random models; empty means degenerate at b
  real b = -1;            // Kingman; defaults to the law mean
  real h = -1;            // largest fitness; defaults to S_Q
  real limit_tol = 1e-10L;
  real root_tol = 1e-12L;
  real mc_tol = 1e-9L;
  int n_trunc = 256;
  int l_max = 128;
  int k_max = 128;
  int n_start = 16;
  int n_max = 1024;
  int psi_n = 0;  // > 0 adds the Psi-rate estimator to `criterion`
  int samples = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<int> k_list{1, 2, 3};
  std::string format = "csv";
  std::string out;
  std::string inject;  // selftest fault injection: `holder`
};

// `key = value` lines, `#` comments, optional `[section]` headers (keys are global).
run_config parse_config_text(const std::string& text);
// JSON object, flat or one level of sections.
run_config parse_config_json(const std::string& text);
// Dispatches on the first non-blank character.
run_config load_config(const std::string& path);

void apply_setting(run_config& cfg, const std::string& key, const std::string& value);
// Tolerances positive, format known, counts in range.
void validate(const run_config& cfg);

}  // namespace hoc
