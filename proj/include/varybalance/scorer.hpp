#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "varybalance/types.hpp"

namespace vb {

class CacheStore;
class InflightLimiter;

// Pluggable source of per-token log-probabilities. Implementations must be
// safe for concurrent score() calls; the id must be stable across process
// runs because it participates in cache keys.
class ScorerProvider {
public:
    virtual ~ScorerProvider() = default;

    virtual std::string scorer_id() const = 0;

    // Aligned tokens/logprobs for the whole text. Tokens without a
    // conditional log-probability are excluded and counted in
    // skipped_prefix. Throws ProviderError on transport failure.
    virtual TokenLogProbs score(const std::string& text) = 0;

    virtual bool supports_batch() const { return false; }
    // 0 means unlimited.
    virtual std::size_t max_text_chars() const { return 0; }

    // Number of real scoring invocations (cache hits do not count).
    std::uint64_t call_count() const { return calls_.load(); }

protected:
    void record_call() { calls_.fetch_add(1); }

private:
    std::atomic<std::uint64_t> calls_{0};
};

// Runs the provider and enforces the scored-token floor. Raises InvalidText
// for blank input and TooShort when fewer than min_tokens tokens were
// scored.
TokenLogProbs score_tokens(const std::string& text, ScorerProvider& provider,
                           int min_tokens = 1);

// Cache-transparent variant: identical inputs with a warm cache perform
// zero provider calls. `limiter`, when given, bounds in-flight provider
// work; both pointers may be null.
TokenLogProbs score_tokens_cached(const std::string& text, ScorerProvider& provider,
                                  CacheStore* cache, InflightLimiter* limiter,
                                  int min_tokens = 1);

// Mean negated logprob over the scored tokens: log-perplexity in
// nats/token. Non-negative and finite for valid inputs.
double log_ppl(const TokenLogProbs& tlp, int min_tokens = 1);

} // namespace vb
