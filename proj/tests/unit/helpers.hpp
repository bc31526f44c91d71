#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <stdexcept>
#include <string>

#ifndef SECBENCH_REPO_DIR
#error "SECBENCH_REPO_DIR must be defined by the build"
#endif

namespace testutil {

inline std::string repo_dir() { return SECBENCH_REPO_DIR; }
inline std::string fixture(const std::string& rel) {
    return repo_dir() + "/tests/fixtures/" + rel;
}
inline std::string data_file(const std::string& rel) {
    return repo_dir() + "/data/" + rel;
}

// Unique directory under the system temp root, removed on scope exit.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        const auto candidate =
            base / ("secbench_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(candidate);
        path_ = candidate;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string sub(const std::string& rel) const {
        return (path_ / rel).string();
    }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
