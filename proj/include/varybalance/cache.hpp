#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "varybalance/types.hpp"

namespace vb {

enum class CacheKind { Rewrite, Score };

const char* to_string(CacheKind kind);

// Content-addressed key for one provider output. Two keys are equal iff
// every field is equal; the on-disk address is a SHA-256 over the canonical
// field encoding.
struct CacheKey {
    CacheKind kind = CacheKind::Rewrite;
    std::string provider_id;
    std::string model_id;   // empty when the provider id already pins the model
    std::string prompt;     // rewrite instruction; empty for scores
    std::string params_digest;
    std::string text_digest;
    int index = 0; // rewrite index; 0 for originals/scores

    std::string digest() const;

    friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

std::string params_digest(const GenParams& params);

struct CacheCounters {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t puts = 0;
};

// On-disk store: one file per entry under a two-level fan-out by digest
// prefix. Entries carry a format version, the full key, and a payload
// checksum; writers go through a temporary file plus atomic rename, so
// concurrent readers and writers (in-process or cross-process) are safe.
class CacheStore {
public:
    static constexpr int kFormatVersion = 1;

    explicit CacheStore(std::filesystem::path root);
    ~CacheStore();

    CacheStore(const CacheStore&) = delete;
    CacheStore& operator=(const CacheStore&) = delete;

    // Returns the stored payload or nullopt. A corrupt entry (bad checksum,
    // foreign key, unreadable JSON) is quarantined with a warning and
    // reported as a miss.
    std::optional<json> get(const CacheKey& key);

    // Durable once returned; idempotent for identical (key, value).
    void put(const CacheKey& key, const json& payload);

    const std::filesystem::path& root() const { return root_; }

    CacheCounters counters() const;

    // Scans the store: entry count and total bytes per kind.
    struct DiskStats {
        std::uint64_t rewrite_entries = 0;
        std::uint64_t score_entries = 0;
        std::uint64_t total_bytes = 0;
        std::uint64_t quarantined = 0;
    };
    DiskStats scan() const;

    // Persisted cumulative hit/miss counters (best effort,
    // last-writer-wins). Called from the destructor; safe to call early.
    void flush_counters();

private:
    std::filesystem::path entry_path(const CacheKey& key) const;

    std::filesystem::path root_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
    std::atomic<std::uint64_t> puts_{0};
    bool counters_flushed_ = false;
};

// Reads the persisted cumulative counters (zeros when absent).
CacheCounters load_persisted_counters(const std::filesystem::path& root);

} // namespace vb
