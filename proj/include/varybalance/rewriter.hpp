#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>

#include "varybalance/types.hpp"

namespace vb {

class CacheStore;
class InflightLimiter;

// Pluggable rewrite source. Implementations must be safe for concurrent
// rewrite() calls; the id participates in cache keys and must be stable
// across process runs.
class RewriteProvider {
public:
    virtual ~RewriteProvider() = default;

    virtual std::string rewriter_id() const = 0;
    virtual GenParams default_params() const { return {}; }

    // One rewrite of `text` under `instruction`. `index` (1-based)
    // distinguishes the k draws for a sample. Throws ProviderError on
    // transport failure.
    virtual std::string rewrite(const std::string& text, const std::string& instruction,
                                int index, const GenParams& params) = 0;

    // Number of real rewrite invocations (cache hits do not count).
    std::uint64_t call_count() const { return calls_.load(); }

protected:
    void record_call() { calls_.fetch_add(1); }

private:
    std::atomic<std::uint64_t> calls_{0};
};

using SynonymTable = std::map<std::string, std::string>;

// Built-in word-substitution table for the mock rewriter.
const SynonymTable& default_synonyms();

// Deterministic text perturbation driven by (text hash, index, seed):
// per-occurrence synonym substitution plus a sentence-order shuffle. The
// output is non-empty and differs from the input whenever the text offers
// at least two perturbable units (substitutable word occurrences, or
// reorderable sentences when at least two are distinct); inputs with less
// to work with come back unchanged.
std::string mock_rewrite(const std::string& text, int index, std::uint64_t seed,
                         const SynonymTable& table = default_synonyms());

// Offline provider around mock_rewrite. With a custom table the id carries
// the table digest so cache entries never cross tables.
class MockRewriteProvider final : public RewriteProvider {
public:
    explicit MockRewriteProvider(std::uint64_t seed = 0);
    MockRewriteProvider(std::uint64_t seed, SynonymTable table);

    std::string rewriter_id() const override { return id_; }
    std::string rewrite(const std::string& text, const std::string& instruction, int index,
                        const GenParams& params) override;

private:
    std::uint64_t seed_;
    SynonymTable table_;
    std::string id_;
};

// Returns every text unchanged; pins the msd = 0 degenerate case.
class IdentityRewriteProvider final : public RewriteProvider {
public:
    std::string rewriter_id() const override { return "identity"; }
    std::string rewrite(const std::string& text, const std::string& instruction, int index,
                        const GenParams& params) override;
};

// k independent rewrites of the original sample text (never chained),
// indices 1..k. Cache entries are per index, so a later call with a larger
// k reuses the stored rewrites and only generates the extension; identical
// warm-cache calls perform zero provider calls. Blank provider output is
// retried up to empty_retry_limit extra times, then raises EmptyRewrite.
RewriteBundle rewrite_k(const TextSample& sample, int k, RewriteProvider& provider,
                        const std::string& prompt = kDefaultRewritePrompt,
                        const GenParams& params = {}, CacheStore* cache = nullptr,
                        InflightLimiter* limiter = nullptr, int empty_retry_limit = 2);

} // namespace vb
