#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "varybalance/errors.hpp"

namespace vbtest {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        const auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        for (int i = 0; i < 100; ++i) {
            auto candidate = base / ("vb-test-" + std::to_string(rd()));
            std::error_code ec;
            if (std::filesystem::create_directories(candidate, ec)) {
                path_ = std::move(candidate);
                return;
            }
        }
        throw std::runtime_error("could not create a temp directory");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Runs fn and returns the VbError it threw, or nullopt if it returned.
template <typename Fn>
std::optional<vb::VbError> catch_vb(Fn&& fn) {
    try {
        std::forward<Fn>(fn)();
    } catch (const vb::VbError& e) {
        return e;
    }
    return std::nullopt;
}

inline bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

} // namespace vbtest
