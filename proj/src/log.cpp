#include "role_engine/log.hpp"

#include <iostream>
#include <mutex>

namespace role_engine::log {

namespace {
std::mutex g_log_mutex;
Level g_level = Level::warning;
std::function<void(Level, const std::string&)> g_sink;

const char* level_name(Level level) {
    switch (level) {
    case Level::debug:
        return "debug";
    case Level::info:
        return "info";
    case Level::warning:
        return "warning";
    case Level::error:
        return "error";
    case Level::off:
        break;
    }
    return "off";
}
} // namespace

void set_level(Level level) {
    std::lock_guard lock(g_log_mutex);
    g_level = level;
}

Level level() {
    std::lock_guard lock(g_log_mutex);
    return g_level;
}

void set_sink(std::function<void(Level, const std::string&)> sink) {
    std::lock_guard lock(g_log_mutex);
    g_sink = std::move(sink);
}

void write(Level level, const std::string& message) {
    std::lock_guard lock(g_log_mutex);
    if (level < g_level || level == Level::off)
        return;
    if (g_sink)
        g_sink(level, message);
    else
        std::cerr << "[" << level_name(level) << "] " << message << '\n';
}

} // namespace role_engine::log
