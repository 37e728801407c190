#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace sciforge::cli {

namespace fs = std::filesystem;

// Flat hierarchical key-value settings: `[gateway]` + `mode = replay` is the
// key "gateway.mode". Command-line flags are applied on top with set().
struct RunConfig {
    std::map<std::string, std::string> values;

    static RunConfig load(const fs::path& path);
    static RunConfig parse(std::string_view content, const std::string& origin = "<config>");
    void set(const std::string& key, std::string value) { values[key] = std::move(value); }
    std::optional<std::string> get(const std::string& key) const;
};

// Keys a config file may contain. "train.*" keys are passed through to the
// training config and checked there.
const std::vector<std::string>& known_keys();
std::vector<std::string> unknown_keys(const RunConfig& config);

// Typed access over a RunConfig that collects every violation instead of
// stopping at the first one, and remembers what was resolved for manifests.
class Settings {
public:
    explicit Settings(const RunConfig& config) : config_(config) {}

    std::optional<std::string> get(const std::string& key);
    std::string str(const std::string& key, const std::string& fallback);
    std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed);
    double real(const std::string& key, double fallback, double lo, double hi, bool lo_open = false);
    std::uint64_t count(const std::string& key, std::uint64_t fallback, std::uint64_t min = 0);
    bool flag(const std::string& key, bool fallback);
    std::vector<std::string> list(const std::string& key);

    // Existing file or directory named by `key`, else `fallback` if given.
    std::optional<fs::path> input(const std::string& key, const std::optional<fs::path>& fallback = std::nullopt,
                                  bool directory = false);
    // Output path named by `key`, else <paths.output_dir>/<default_name>.
    std::optional<fs::path> output(const std::string& key, const std::string& default_name);
    // run.seed; a violation when `required` and absent.
    std::optional<std::uint64_t> seed(bool required);

    void violation(std::string message) { violations_.push_back(std::move(message)); }
    const std::vector<std::string>& violations() const noexcept { return violations_; }
    const nlohmann::ordered_json& resolved() const noexcept { return resolved_; }

private:
    void note(const std::string& key, const nlohmann::ordered_json& value);

    const RunConfig& config_;
    std::vector<std::string> violations_;
    nlohmann::ordered_json resolved_ = nlohmann::ordered_json::object();
};

// <dir>/<stem>.<tag><ext>, e.g. sibling("out/a.jsonl", "manifest", ".json") -> out/a.manifest.json
fs::path sibling(const fs::path& path, const std::string& tag, const std::string& ext);

// ISO-8601 UTC timestamp: run.created_at, else SOURCE_DATE_EPOCH, else now.
std::string creation_time(const RunConfig& config);

enum ExitCode : int { ok = 0, failed = 1, usage = 2 };

// Entry point behind the `sciforge` binary. `args` excludes the program name.
// Reports and tables go to `out`; logs go to standard error.
int run(const std::vector<std::string>& args, std::ostream& out);

}  // namespace sciforge::cli
