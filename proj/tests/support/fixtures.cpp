#include "fixtures.hpp"

#include <atomic>
#include <chrono>

#include <unistd.h>

#include "sciforge/util/io.hpp"

namespace sciforge::testing {

std::filesystem::path data_dir() { return SCIFORGE_TEST_DATA; }
std::filesystem::path spec_dir() { return SCIFORGE_SPEC_DIR; }

nlohmann::json load_json(const std::string& name) { return nlohmann::json::parse(io::read_file(data_dir() / name)); }
std::string load_text(const std::string& name) { return io::read_file(data_dir() / name); }

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("sciforge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
             std::to_string(stamp));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace sciforge::testing
