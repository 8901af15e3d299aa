#pragma once

// Minimal leveled logging to stderr. The threshold comes from the
// DERMABCD_LOG environment variable (error, warn, info, debug; default warn).

#include <string_view>

namespace dermabcd {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level();
void set_log_level(LogLevel level);
/// Parses a level name; throws std::invalid_argument for unknown names.
LogLevel parse_log_level(std::string_view name);

void log(LogLevel level, std::string_view message);
inline void log_warn(std::string_view m) { log(LogLevel::Warn, m); }
inline void log_info(std::string_view m) { log(LogLevel::Info, m); }
inline void log_debug(std::string_view m) { log(LogLevel::Debug, m); }
inline void log_error(std::string_view m) { log(LogLevel::Error, m); }

}  // namespace dermabcd
