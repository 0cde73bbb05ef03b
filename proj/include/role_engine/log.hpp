#pragma once

#include <functional>
#include <string>

namespace role_engine::log {

enum class Level { debug, info, warning, error, off };

void set_level(Level level);
Level level();

/// Replaces the stderr sink (tests capture warnings through this).
void set_sink(std::function<void(Level, const std::string&)> sink);

void write(Level level, const std::string& message);

inline void debug(const std::string& m) { write(Level::debug, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void warning(const std::string& m) { write(Level::warning, m); }
inline void error(const std::string& m) { write(Level::error, m); }

} // namespace role_engine::log
