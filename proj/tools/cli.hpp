#pragma once

#include "manifest.hpp"

#include <optional>
#include <string>
#include <vector>

namespace debiaskit::cli {

struct Outcome {
  int exit_code = 0;
  std::optional<RunRecord> record;  // set when a command completed
};

// Parses argv (without the program name), runs one subcommand and writes its
// manifest. Hard errors are logged and turned into a nonzero exit code.
Outcome execute(const std::vector<std::string>& args);

inline int run(const std::vector<std::string>& args) { return execute(args).exit_code; }

}  // namespace debiaskit::cli
