#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "odmarl/run_config.hpp"

namespace odmarl {

// Command bodies behind the CLI. Each returns the process exit code:
//   0 success, 1 validation error, 2 verification failure, 3 IO error.
// Exceptions are mapped to those codes by the callers' shared wrapper.

int cmd_collect(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_reproduce_tables(std::ostream& out);
int cmd_verify(const std::string& suite, std::ostream& out);
int cmd_inspect(const RunConfig& config, int agent, int state, int action,
                std::ostream& out);

/// Runs fn() and maps ValidationError -> 1, IoError -> 3, everything else
/// that escapes -> 2, printing the message to err.
int run_command(const std::function<int()>& fn, std::ostream& err);

}  // namespace odmarl
