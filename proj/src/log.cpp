#include "rankflow/log.hpp"

#include <cstdio>
#include <cstdlib>

namespace rankflow {

namespace {

LogLevel parse_level() {
    const char* env = std::getenv("RANKFLOW_LOG");
    if (env == nullptr) return LogLevel::warn;
    const std::string value(env);
    if (value == "error") return LogLevel::error;
    if (value == "warn") return LogLevel::warn;
    if (value == "info") return LogLevel::info;
    if (value == "debug") return LogLevel::debug;
    std::fprintf(stderr, "rankflow: unknown RANKFLOW_LOG value '%s', using warn\n", env);
    return LogLevel::warn;
}

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::error: return "error";
        case LogLevel::warn: return "warn";
        case LogLevel::info: return "info";
        case LogLevel::debug: return "debug";
    }
    return "?";
}

}  // namespace

LogLevel log_level() {
    static const LogLevel level = parse_level();
    return level;
}

void log_message(LogLevel level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    std::fprintf(stderr, "rankflow %s: %s\n", level_name(level), message.c_str());
}

}  // namespace rankflow
