#include "hoc/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hoc/format.hpp"

namespace hoc {

namespace {

int to_int(const std::string& key, const std::string& v) {
  long long x = parse_int(v);
  if (x < -2147483647LL || x > 2147483647LL) throw config_error(key + " out of range");
  return static_cast<int>(x);
}

std::vector<int> parse_k_list(const std::string& v) {
  std::vector<int> out;
  std::string cur;
  std::string s = v;
  for (char& c : s)
    if (c == '[' || c == ']') c = ' ';
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(to_int("k_list", cur));
  }
  if (out.empty()) throw config_error("k_list is empty");
  return out;
}

}  // namespace

void apply_setting(run_config& cfg, const std::string& key, const std::string& value) {
  std::string v = trim(value);
  if (key == "q") cfg.q_spec = v;
  else if (key == "beta") cfg.beta_spec = v;
  else if (key == "b") cfg.b = parse_real(v);
  else if (key == "h") cfg.h = parse_real(v);
  else if (key == "limit_tol") cfg.limit_tol = parse_real(v);
  else if (key == "root_tol") cfg.root_tol = parse_real(v);
  else if (key == "mc_tol") cfg.mc_tol = parse_real(v);
  else if (key == "n_trunc") cfg.n_trunc = to_int(key, v);
  else if (key == "l_max") cfg.l_max = to_int(key, v);
  else if (key == "k_max") cfg.k_max = to_int(key, v);
  else if (key == "n_start") cfg.n_start = to_int(key, v);
  else if (key == "n_max") cfg.n_max = to_int(key, v);
  else if (key == "psi_n") cfg.psi_n = to_int(key, v);
  else if (key == "samples") cfg.samples = to_int(key, v);
  else if (key == "seed") {
    if (v.empty() || v[0] == '-') throw config_error("seed must be a nonnegative integer");
    size_t pos = 0;
    unsigned long long s = 0;
    try {
      s = std::stoull(v, &pos);
    } catch (const std::exception&) {
      throw config_error("bad seed '" + v + "'");
    }
    if (pos != v.size()) throw config_error("bad seed '" + v + "'");
    cfg.seed = s;
  } else if (key == "threads") cfg.threads = to_int(key, v);
  else if (key == "k_list") cfg.k_list = parse_k_list(v);
  else if (key == "format") cfg.format = v;
  else if (key == "out") cfg.out = v;
  else if (key == "inject") cfg.inject = v;
  else throw config_error("unknown config key '" + key + "'");
}

run_config parse_config_text(const std::string& text) {
  run_config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw config_error("line " + std::to_string(lineno) + ": bad section header");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw config_error("line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

run_config parse_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad JSON config: ") + e.what());
  }
  if (!j.is_object()) throw config_error("JSON config must be an object");
  run_config cfg;
  auto as_text = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
      std::string s;
      for (auto& e : v) s += (s.empty() ? "" : ",") + e.dump();
      return s;
    }
    return v.dump();
  };
  for (auto& [k, v] : j.items()) {
    if (v.is_object()) {
      for (auto& [k2, v2] : v.items()) apply_setting(cfg, k2, as_text(v2));
    } else {
      apply_setting(cfg, k, as_text(v));
    }
  }
  return cfg;
}

run_config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();
  size_t p = text.find_first_not_of(" \t\r\n");
  if (p != std::string::npos && text[p] == '{') return parse_config_json(text);
  return parse_config_text(text);
}

void validate(const run_config& cfg) {
  if (!(cfg.limit_tol > 0) || !(cfg.root_tol > 0) || !(cfg.mc_tol > 0))
    throw config_error("tolerances must be positive");
  if (cfg.format != "csv" && cfg.format != "json") throw config_error("format must be csv or json");
  if (cfg.samples < 1) throw config_error("samples must be >= 1");
  if (cfg.threads < 0) throw config_error("threads must be >= 0");
  if (cfg.n_start < 2 || cfg.n_max < cfg.n_start) throw config_error("need 2 <= n_start <= n_max");
  if (cfg.l_max < 2 || cfg.n_trunc < cfg.l_max + 2) throw config_error("need l_max >= 2 and n_trunc >= l_max + 2");
  if (cfg.k_max < 4) throw config_error("k_max must be >= 4");
  for (int k : cfg.k_list)
    if (k < 1) throw config_error("moment orders must be >= 1");
}

}  // namespace hoc
