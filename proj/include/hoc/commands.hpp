#pragma once

#include <exception>
#include <string>
#include <vector>

#include "hoc/config.hpp"

namespace hoc {

enum exit_code { exit_ok = 0, exit_selftest_failed = 1, exit_config = 2, exit_numeric = 3 };

struct cell {
  std::string text;
  bool numeric = false;
};

cell num(real x);
cell str(std::string s);

struct table {
  std::vector<std::string> header;
  std::vector<std::vector<cell>> rows;

  // csv: header line then one line per row; json: array of objects keyed by the header
  std::string render(const std::string& format) const;
};

struct command_output {
  std::string text;
  int exit_code = exit_ok;
};

command_output cmd_kingman(const run_config& cfg);
command_output cmd_criterion(const run_config& cfg);
command_output cmd_compare(const run_config& cfg);
command_output cmd_equilibrium(const run_config& cfg);
command_output cmd_selftest(const run_config& cfg);

// name is one of kingman, criterion, compare, equilibrium, selftest
command_output run_command(const std::string& name, const run_config& cfg);

// exit status for an exception escaping a command
int exit_code_for(const std::exception& e);

}  // namespace hoc
