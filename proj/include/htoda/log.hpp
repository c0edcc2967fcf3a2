#pragma once

#include <string>

namespace htoda::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

/// Threshold parsed once from the HTODA_LOG environment variable
/// (debug|info|warn|error|off, default warn).
Level threshold();

void write(Level level, const std::string& msg);

inline void debug(const std::string& msg) { write(Level::debug, msg); }
inline void info(const std::string& msg) { write(Level::info, msg); }
inline void warn(const std::string& msg) { write(Level::warn, msg); }
inline void error(const std::string& msg) { write(Level::error, msg); }

}  // namespace htoda::log
