#include "varybalance/cache.hpp"

#include "varybalance/errors.hpp"
#include "varybalance/util.hpp"

#include <json.hpp>

#include <fstream>

namespace vb {

namespace fs = std::filesystem;

const char* to_string(CacheKind kind) {
    return kind == CacheKind::Rewrite ? "rewrite" : "score";
}

static json key_to_json(const CacheKey& key) {
    return json{{"kind", to_string(key.kind)},
                {"provider_id", key.provider_id},
                {"model_id", key.model_id},
                {"prompt", key.prompt},
                {"params_digest", key.params_digest},
                {"text_digest", key.text_digest},
                {"index", key.index}};
}

std::string CacheKey::digest() const {
    return sha256_hex(key_to_json(*this).dump());
}

std::string params_digest(const GenParams& params) {
    return sha256_hex(gen_params_to_json(params).dump());
}

CacheStore::CacheStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) {
        raise(ErrorKind::StoreUnwritable, "cannot open cache root " + root_.string());
    }
}

CacheStore::~CacheStore() {
    try {
        flush_counters();
    } catch (...) {
        // Counter persistence is best effort.
    }
}

fs::path CacheStore::entry_path(const CacheKey& key) const {
    const std::string digest = key.digest();
    return root_ / to_string(key.kind) / digest.substr(0, 2) / digest.substr(2, 2) /
           (digest + ".json");
}

std::optional<json> CacheStore::get(const CacheKey& key) {
    const fs::path path = entry_path(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        misses_.fetch_add(1);
        return std::nullopt;
    }
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    auto quarantine = [&](const std::string& reason) {
        std::error_code ec;
        fs::rename(path, fs::path(path.string() + ".quarantine"), ec);
        warnln("cache entry " + path.string() + " " + reason +
               (ec ? " (quarantine rename failed)" : "; quarantined"));
        misses_.fetch_add(1);
    };

    json entry;
    try {
        entry = json::parse(raw);
    } catch (const json::exception&) {
        quarantine("is unparseable");
        return std::nullopt;
    }
    if (!entry.contains("format_version") ||
        entry["format_version"].get<int>() != kFormatVersion) {
        // Version bumps invalidate rather than misread; not corruption.
        misses_.fetch_add(1);
        return std::nullopt;
    }
    if (!entry.contains("key") || entry["key"] != key_to_json(key)) {
        quarantine("holds a different key");
        return std::nullopt;
    }
    if (!entry.contains("checksum") || !entry.contains("payload") ||
        entry["checksum"].get<std::string>() != sha256_hex(entry["payload"].dump())) {
        quarantine("failed its checksum");
        return std::nullopt;
    }
    hits_.fetch_add(1);
    return entry["payload"];
}

void CacheStore::put(const CacheKey& key, const json& payload) {
    json entry{{"format_version", kFormatVersion},
               {"key", key_to_json(key)},
               {"checksum", sha256_hex(payload.dump())},
               {"payload", payload}};
    atomic_write_file(entry_path(key), entry.dump());
    puts_.fetch_add(1);
}

CacheCounters CacheStore::counters() const {
    return {hits_.load(), misses_.load(), puts_.load()};
}

CacheStore::DiskStats CacheStore::scan() const {
    DiskStats stats;
    std::error_code ec;
    for (auto kind : {CacheKind::Rewrite, CacheKind::Score}) {
        fs::path dir = root_ / to_string(kind);
        if (!fs::is_directory(dir)) continue;
        for (auto it = fs::recursive_directory_iterator(dir, ec);
             !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
            if (!it->is_regular_file()) continue;
            const std::string name = it->path().filename().string();
            if (name.ends_with(".quarantine")) {
                ++stats.quarantined;
                continue;
            }
            if (!name.ends_with(".json")) continue;
            stats.total_bytes += it->file_size(ec);
            if (kind == CacheKind::Rewrite) ++stats.rewrite_entries;
            else ++stats.score_entries;
        }
    }
    return stats;
}

static fs::path counters_path(const fs::path& root) { return root / "stats.json"; }

CacheCounters load_persisted_counters(const fs::path& root) {
    CacheCounters c;
    std::ifstream in(counters_path(root));
    if (!in) return c;
    try {
        json j = json::parse(in);
        c.hits = j.value("hits", std::uint64_t{0});
        c.misses = j.value("misses", std::uint64_t{0});
        c.puts = j.value("puts", std::uint64_t{0});
    } catch (const json::exception&) {
        // Stale or corrupt stats are not worth failing over.
    }
    return c;
}

void CacheStore::flush_counters() {
    if (counters_flushed_) return;
    counters_flushed_ = true;
    CacheCounters total = load_persisted_counters(root_);
    total.hits += hits_.load();
    total.misses += misses_.load();
    total.puts += puts_.load();
    json j{{"hits", total.hits}, {"misses", total.misses}, {"puts", total.puts}};
    atomic_write_file(counters_path(root_), j.dump());
}

} // namespace vb
