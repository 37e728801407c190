#include "sciforge/util/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace sciforge::log {
namespace {

std::atomic<Level> g_level{Level::info};
std::mutex g_mutex;

std::string quote(std::string_view v) {
    const bool needs = v.empty() || v.find_first_of(" =\"\t\n") != std::string_view::npos;
    if (!needs) return std::string(v);
    std::string out = "\"";
    for (char c : v) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

const char* name(Level l) {
    switch (l) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
    }
    return "info";
}

}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

bool parse_level(std::string_view n, Level& out) {
    for (auto l : {Level::debug, Level::info, Level::warn, Level::error}) {
        if (n == name(l)) {
            out = l;
            return true;
        }
    }
    return false;
}

void write(Level lvl, std::string_view stage, std::string_view msg, const Fields& fields) {
    if (static_cast<int>(lvl) < static_cast<int>(g_level.load())) return;
    std::string line = "level=";
    line += name(lvl);
    line += " stage=" + quote(stage);
    line += " msg=" + quote(msg);
    for (const auto& [k, v] : fields) line += " " + k + "=" + quote(v);
    line += '\n';
    std::lock_guard lock(g_mutex);
    std::cerr << line;
}

}  // namespace sciforge::log
