#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace sciforge::testing {

std::filesystem::path data_dir();
std::filesystem::path spec_dir();
nlohmann::json load_json(const std::string& name);
std::string load_text(const std::string& name);

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace sciforge::testing
