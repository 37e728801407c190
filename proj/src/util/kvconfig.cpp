#include "sciforge/util/kvconfig.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sciforge/util/text.hpp"

namespace sciforge::kv {

Document Document::parse(std::string_view content, std::string origin) {
    Document doc;
    doc.origin_ = std::move(origin);
    std::string section;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(content, '\n')) {
        ++line_no;
        const auto line = text::trim_view(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::runtime_error(doc.origin_ + ":" + std::to_string(line_no) +
                                         ": malformed section header");
            }
            section = text::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::runtime_error(doc.origin_ + ":" + std::to_string(line_no) +
                                     ": expected `key = value`");
        }
        auto key = text::trim(line.substr(0, eq));
        if (key.empty()) {
            throw std::runtime_error(doc.origin_ + ":" + std::to_string(line_no) + ": empty key");
        }
        if (!section.empty()) key = section + "." + key;
        auto value = text::trim(line.substr(eq + 1));
        const auto [it, inserted] = doc.entries_.emplace(key, Entry{std::move(value), line_no});
        if (!inserted) {
            throw std::runtime_error(doc.origin_ + ":" + std::to_string(line_no) +
                                     ": duplicate key `" + key + "` (first on line " +
                                     std::to_string(it->second.line) + ")");
        }
    }
    return doc;
}

Document Document::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::optional<std::string> Document::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
}

std::string Document::get_or(const std::string& key, std::string fallback) const {
    auto v = get(key);
    return v ? *v : std::move(fallback);
}

std::map<std::string, std::string> Document::with_prefix(const std::string& prefix) const {
    std::map<std::string, std::string> out;
    const std::string p = prefix + ".";
    for (const auto& [k, e] : entries_) {
        if (k.rfind(p, 0) == 0) out.emplace(k.substr(p.size()), e.value);
    }
    return out;
}

}  // namespace sciforge::kv
