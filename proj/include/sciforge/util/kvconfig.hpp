#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sciforge::kv {

// Flat key-value text: `key = value` per line, `#` or `;` full-line comments,
// and optional `[section]` headers that prefix following keys with "section.".
struct Entry {
    std::string value;
    std::size_t line = 0;
};

class Document {
public:
    static Document parse(std::string_view content, std::string origin = "<string>");
    static Document load(const std::filesystem::path& path);

    const std::string& origin() const noexcept { return origin_; }
    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, std::string fallback) const;
    // Keys under `prefix.` with the prefix stripped.
    std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

private:
    std::string origin_;
    std::map<std::string, Entry> entries_;
};

}  // namespace sciforge::kv
