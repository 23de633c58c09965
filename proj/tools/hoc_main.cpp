#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hoc/commands.hpp"
#include "hoc/config.hpp"

namespace {

struct overrides {
  std::string config, seed, samples, out, format, q, beta, b, h, threads, k_list, inject;
};

void add_flags(CLI::App* sub, overrides& o) {
  sub->add_option("--config", o.config, "config file (key = value with [sections], or JSON)");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--samples", o.samples, "Monte Carlo samples");
  sub->add_option("--out", o.out, "output path (default stdout)");
  sub->add_option("--format", o.format, "csv or json");
  sub->add_option("--q", o.q, "mutant distribution spec");
  sub->add_option("--beta", o.beta, "mutation law spec");
  sub->add_option("--b", o.b, "constant mutation probability");
  sub->add_option("--hmax", o.h, "largest fitness value h");
  sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  sub->add_option("--k-list", o.k_list, "moment orders, e.g. 1,2,3");
}

hoc::run_config build_config(const overrides& o) {
  hoc::run_config cfg = o.config.empty() ? hoc::run_config{} : hoc::load_config(o.config);
  auto set = [&](const char* key, const std::string& v) {
    if (!v.empty()) hoc::apply_setting(cfg, key, v);
  };
  set("seed", o.seed);
  set("samples", o.samples);
  set("out", o.out);
  set("format", o.format);
  set("q", o.q);
  set("beta", o.beta);
  set("b", o.b);
  set("h", o.h);
  set("threads", o.threads);
  set("k_list", o.k_list);
  set("inject", o.inject);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"House-of-Cards mutation-selection models: Kingman and two random-b variants"};
  app.require_subcommand(1);
  overrides o;
  const char* names[] = {"kingman", "criterion", "compare", "equilibrium", "selftest"};
  const char* help[] = {"constant-b equilibrium and branch", "condensation criterion, log-rate chain and verdict",
                        "model comparison table", "first random model equilibrium and condensate routes",
                        "invariant suites at small scale"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    add_flags(sub, o);
    if (std::string(names[i]) == "selftest") sub->add_option("--inject", o.inject, "fault injection (holder)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hoc::exit_config;
  }
  std::string cmd = app.get_subcommands().front()->get_name();
  try {
    hoc::run_config cfg = build_config(o);
    hoc::command_output res = hoc::run_command(cmd, cfg);
    if (cfg.out.empty()) {
      std::cout << res.text;
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw hoc::config_error("cannot write '" + cfg.out + "'");
      f << res.text;
    }
    return res.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hoc::exit_code_for(e);
  }
}
