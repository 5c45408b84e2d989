#pragma once

#include <string>

namespace craft {

// Verbosity is read once from the CRAFT_LOG environment variable:
// "0"/"quiet", "1"/"warn" (default), "2"/"info", "3"/"debug".
enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level();

void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace craft
