#include "htoda/log.hpp"

#include <cstdlib>
#include <iostream>

namespace htoda::log {

namespace {

Level parse_threshold() {
    const char* env = std::getenv("HTODA_LOG");
    if (!env) return Level::warn;
    const std::string v(env);
    if (v == "debug") return Level::debug;
    if (v == "info") return Level::info;
    if (v == "warn") return Level::warn;
    if (v == "error") return Level::error;
    if (v == "off") return Level::off;
    return Level::warn;
}

const char* tag(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
        default: return "?";
    }
}

}  // namespace

Level threshold() {
    static const Level t = parse_threshold();
    return t;
}

void write(Level level, const std::string& msg) {
    if (level < threshold()) return;
    std::cerr << "[htoda:" << tag(level) << "] " << msg << "\n";
}

}  // namespace htoda::log
