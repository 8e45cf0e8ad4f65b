#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

// Shared scratch-file helpers for the test suites.

namespace evtos_test {

inline std::filesystem::path temp_file(const std::string& stem) {
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path() / "evtos_tests";
    std::filesystem::create_directories(dir);
    return dir / (stem + "_" + std::to_string(counter++) + ".tmp");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace evtos_test
