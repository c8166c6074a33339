#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vb {

// SHA-256 of the raw bytes, lowercase hex.
std::string sha256_hex(std::string_view bytes);

// FNV-1a 64-bit, used for fast deterministic seeding (not for cache keys).
std::uint64_t fnv1a64(std::string_view bytes);

// splitmix64 step; standard finalizer-style mixer.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic RNG with identical output on every platform. std::mt19937
// would do, but its distributions are implementation-defined; everything
// that must be bit-reproducible across machines goes through this.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform integer in [0, n), n >= 1. Rejection-sampled, no modulo bias.
    std::uint64_t next_below(std::uint64_t n);

    // Uniform double in [0, 1).
    double next_real();

    // Uniform double in [lo, hi).
    double next_real(double lo, double hi) { return lo + (hi - lo) * next_real(); }

    bool next_bool() { return (next_u64() & 1u) != 0; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
};

// ASCII whitespace trim.
std::string_view trim(std::string_view s);

// Splits on runs of ASCII whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view text);

// Splits UTF-8 text into one string per code point. Invalid bytes are
// passed through as single-byte tokens.
std::vector<std::string> split_codepoints(std::string_view text);

// Whole-file read; raises IoError if unreadable.
std::string read_file(const std::filesystem::path& path);

// Write-to-temporary then atomic rename into place. Parent directories are
// created as needed.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// Formats a double with enough digits to round-trip exactly.
std::string format_double(double value);

// Stderr warning line, prefixed. Used for non-fatal conditions (cache
// quarantine, retry notices).
void warnln(const std::string& message);

// UTC timestamp "YYYYMMDDTHHMMSSZ" for run directory names.
std::string utc_timestamp_compact();

// UTC timestamp ISO-8601 for manifests.
std::string utc_timestamp_iso();

} // namespace vb
