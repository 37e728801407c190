#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sciforge::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3 };

void set_level(Level level);
Level level();
bool parse_level(std::string_view name, Level& out);

using Fields = std::vector<std::pair<std::string, std::string>>;

// One logfmt line on stderr: level=... stage=... msg="..." k=v ...
void write(Level level, std::string_view stage, std::string_view msg, const Fields& fields = {});

inline void info(std::string_view stage, std::string_view msg, const Fields& f = {}) {
    write(Level::info, stage, msg, f);
}
inline void warn(std::string_view stage, std::string_view msg, const Fields& f = {}) {
    write(Level::warn, stage, msg, f);
}
inline void error(std::string_view stage, std::string_view msg, const Fields& f = {}) {
    write(Level::error, stage, msg, f);
}

}  // namespace sciforge::log
