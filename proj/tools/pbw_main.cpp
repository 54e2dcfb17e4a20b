#include <iostream>

#include "cli/cli.hpp"

extern char** environ;

int main(int argc, char** argv) {
  pbw::cli::Environment env;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string::npos && entry.starts_with("PBW_")) env[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return pbw::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc), env, std::cout, std::cerr);
}
