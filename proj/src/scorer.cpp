#include "varybalance/scorer.hpp"

#include "varybalance/cache.hpp"
#include "varybalance/concurrency.hpp"
#include "varybalance/errors.hpp"
#include "varybalance/util.hpp"

#include <json.hpp>

#include <cmath>

namespace vb {

namespace {

void check_min_tokens(const TokenLogProbs& tlp, int min_tokens) {
    if (static_cast<int>(tlp.size()) < min_tokens) {
        raise(ErrorKind::TooShort,
              "only " + std::to_string(tlp.size()) + " scored tokens, need " +
                  std::to_string(min_tokens));
    }
}

} // namespace

TokenLogProbs score_tokens(const std::string& text, ScorerProvider& provider,
                           int min_tokens) {
    if (trim(text).empty()) raise(ErrorKind::InvalidText, "cannot score empty text");
    TokenLogProbs tlp = provider.score(text);
    check_min_tokens(tlp, min_tokens);
    return tlp;
}

TokenLogProbs score_tokens_cached(const std::string& text, ScorerProvider& provider,
                                  CacheStore* cache, InflightLimiter* limiter,
                                  int min_tokens) {
    if (cache == nullptr) {
        InflightLimiter::Guard guard(limiter);
        return score_tokens(text, provider, min_tokens);
    }
    CacheKey key;
    key.kind = CacheKind::Score;
    key.provider_id = provider.scorer_id();
    key.text_digest = sha256_hex(text);
    key.index = 0;
    if (auto hit = cache->get(key)) {
        TokenLogProbs tlp = TokenLogProbs::from_json(*hit);
        check_min_tokens(tlp, min_tokens);
        return tlp;
    }
    TokenLogProbs tlp = [&] {
        InflightLimiter::Guard guard(limiter);
        return score_tokens(text, provider, min_tokens);
    }();
    cache->put(key, tlp.to_json());
    return tlp;
}

double log_ppl(const TokenLogProbs& tlp, int min_tokens) {
    check_min_tokens(tlp, min_tokens);
    double sum = 0.0;
    for (double lp : tlp.logprobs()) sum += lp;
    double result = -sum / static_cast<double>(tlp.size());
    if (!std::isfinite(result)) {
        raise(ErrorKind::NonFinite, "log perplexity is not finite");
    }
    return result;
}

} // namespace vb
