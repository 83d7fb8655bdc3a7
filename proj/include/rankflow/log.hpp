#pragma once

#include <string>

namespace rankflow {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Active level, parsed once from the RANKFLOW_LOG environment variable
/// (error|warn|info|debug); defaults to warn.
LogLevel log_level();

/// Writes to stderr when `level` is at or below the active level. Reports and
/// data never go through here; stderr is diagnostics only.
void log_message(LogLevel level, const std::string& message);

}  // namespace rankflow
