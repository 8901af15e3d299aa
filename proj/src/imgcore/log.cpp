#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>

#include "dermabcd/log.hpp"

namespace dermabcd {

namespace {

LogLevel level_from_env() {
    const char* env = std::getenv("DERMABCD_LOG");
    if (env == nullptr || *env == '\0') {
        return LogLevel::Warn;
    }
    try {
        return parse_log_level(env);
    } catch (const std::invalid_argument&) {
        return LogLevel::Warn;
    }
}

std::atomic<int>& current() {
    static std::atomic<int> level{static_cast<int>(level_from_env())};
    return level;
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

constexpr const char* kNames[] = {"error", "warn", "info", "debug"};

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(current().load()); }

void set_log_level(LogLevel level) { current().store(static_cast<int>(level)); }

LogLevel parse_log_level(std::string_view name) {
    for (int i = 0; i < 4; ++i) {
        if (name == kNames[i]) {
            return static_cast<LogLevel>(i);
        }
    }
    throw std::invalid_argument("unknown log level '" + std::string(name) + "'");
}

void log(LogLevel level, std::string_view message) {
    if (static_cast<int>(level) > current().load()) {
        return;
    }
    std::lock_guard<std::mutex> lock(sink_mutex());
    std::cerr << "[" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace dermabcd
