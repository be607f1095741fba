#pragma once

#include <stdexcept>
#include <string>

namespace fairwasp {

// Bad flags, missing columns, out-of-range parameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or degenerate input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A quantity that cannot be evaluated for the given weights
// (e.g. a conditional probability with zero denominator).
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Verbosity is read once from FAIRWASP_LOG (error|info|debug); default error.
LogLevel log_level();
void log(LogLevel level, const std::string& msg);

int default_thread_count();

}  // namespace fairwasp
