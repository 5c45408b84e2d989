#include "craft/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace craft {

static LogLevel parse_level() {
    const char* env = std::getenv("CRAFT_LOG");
    if (!env || !*env) return LogLevel::warn;
    if (!std::strcmp(env, "0") || !std::strcmp(env, "quiet")) return LogLevel::quiet;
    if (!std::strcmp(env, "1") || !std::strcmp(env, "warn")) return LogLevel::warn;
    if (!std::strcmp(env, "2") || !std::strcmp(env, "info")) return LogLevel::info;
    if (!std::strcmp(env, "3") || !std::strcmp(env, "debug")) return LogLevel::debug;
    return LogLevel::warn;
}

LogLevel log_level() {
    static const LogLevel level = parse_level();
    return level;
}

static void emit(const char* tag, const std::string& msg) {
    std::fprintf(stderr, "[craft %s] %s\n", tag, msg.c_str());
}

void log_warn(const std::string& msg) {
    if (log_level() >= LogLevel::warn) emit("warn", msg);
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) emit("info", msg);
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) emit("debug", msg);
}

}  // namespace craft
