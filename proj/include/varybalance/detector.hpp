#pragma once

#include <vector>

#include "varybalance/types.hpp"

namespace vb {

class CacheStore;
class InflightLimiter;
class RewriteProvider;
class ScorerProvider;

// Mean squared deviation of the rewrite log-perplexities from the
// original's: (1/n)·Σ (log_ppl_i − log_ppl_0)². Raises EmptyRewrites on an
// empty list, NonFinite on non-finite inputs.
double msd(double log_ppl_0, const std::vector<double>& rewrite_log_ppls);

// sign(log_ppl_0 − mean(rewrites)) in {−1, 0, +1}; an exact tie is 0.
int sign_term(double log_ppl_0, const std::vector<double>& rewrite_log_ppls);

// exp(sign·msd)·log_ppl_0. Higher scores indicate human origin. Checked
// finite (NonFinite otherwise).
double base_score(double log_ppl_0, const std::vector<double>& rewrite_log_ppls);

struct ExpansionResult {
    double score_e = 0.0;
    double rho = 0.0;
};

// exp(sign·rho·msd)·log_ppl_0 with rho = msd / Var(rewrites), population
// variance over the rewrites only, clamped to [0, rho_cap]. Zero variance
// maps to rho = rho_cap. Needs at least two rewrites (TooFewRewrites);
// result checked finite.
ExpansionResult expansion_score(double log_ppl_0,
                                const std::vector<double>& rewrite_log_ppls,
                                double rho_cap);

// score ≥ threshold is Human, else Machine.
Label classify(double score, double threshold);

// Full per-sample pipeline: k rewrites of the original, log-perplexity of
// the original and every rewrite, then the score math. Every intermediate
// lands in the returned record. With a warm cache the output is identical
// and no provider call happens. Errors are annotated with the sample id
// and pipeline stage.
VaryBalanceScore detect(const TextSample& sample, const DetectorConfig& cfg,
                        RewriteProvider& rewriter, ScorerProvider& scorer,
                        CacheStore* cache = nullptr, InflightLimiter* limiter = nullptr);

} // namespace vb
