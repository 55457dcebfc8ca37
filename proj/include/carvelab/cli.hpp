#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace carvelab {

/// Runs one carve-lab command. `args` excludes the program name.
/// Returns 0 on success, 1 on a domain error, 2 on a usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads key=value lines ('#' comments and blank lines ignored) into
/// "--key=value" tokens; a `command` key yields the leading subcommand words.
struct ConfigArgs {
  std::vector<std::string> command;
  std::vector<std::string> options;
};
ConfigArgs read_config(const std::string& path);

}  // namespace carvelab
