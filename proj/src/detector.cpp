#include "varybalance/detector.hpp"

#include "varybalance/cache.hpp"
#include "varybalance/errors.hpp"
#include "varybalance/rewriter.hpp"
#include "varybalance/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vb {

namespace {

void require_finite_inputs(double log_ppl_0, const std::vector<double>& rewrite_log_ppls) {
    if (!std::isfinite(log_ppl_0)) raise(ErrorKind::NonFinite, "log_ppl_0 is not finite");
    for (double v : rewrite_log_ppls) {
        if (!std::isfinite(v)) raise(ErrorKind::NonFinite, "rewrite log_ppl is not finite");
    }
}

double mean(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double checked_score(double value, const char* which) {
    if (!std::isfinite(value)) {
        raise(ErrorKind::NonFinite, std::string(which) + " overflowed; lower rho_cap or "
                                        "inspect the inputs");
    }
    return value;
}

} // namespace

double msd(double log_ppl_0, const std::vector<double>& rewrite_log_ppls) {
    if (rewrite_log_ppls.empty()) raise(ErrorKind::EmptyRewrites, "msd needs >= 1 rewrite");
    require_finite_inputs(log_ppl_0, rewrite_log_ppls);
    double sum = 0.0;
    for (double v : rewrite_log_ppls) {
        const double d = v - log_ppl_0;
        sum += d * d;
    }
    return sum / static_cast<double>(rewrite_log_ppls.size());
}

int sign_term(double log_ppl_0, const std::vector<double>& rewrite_log_ppls) {
    if (rewrite_log_ppls.empty()) {
        raise(ErrorKind::EmptyRewrites, "sign_term needs >= 1 rewrite");
    }
    require_finite_inputs(log_ppl_0, rewrite_log_ppls);
    const double diff = log_ppl_0 - mean(rewrite_log_ppls);
    if (diff > 0.0) return 1;
    if (diff < 0.0) return -1;
    return 0;
}

double base_score(double log_ppl_0, const std::vector<double>& rewrite_log_ppls) {
    const double m = msd(log_ppl_0, rewrite_log_ppls);
    const int s = sign_term(log_ppl_0, rewrite_log_ppls);
    return checked_score(std::exp(s * m) * log_ppl_0, "base score");
}

ExpansionResult expansion_score(double log_ppl_0,
                                const std::vector<double>& rewrite_log_ppls,
                                double rho_cap) {
    if (rewrite_log_ppls.size() < 2) {
        raise(ErrorKind::TooFewRewrites,
              "expansion variant needs >= 2 rewrites, got " +
                  std::to_string(rewrite_log_ppls.size()));
    }
    const double m = msd(log_ppl_0, rewrite_log_ppls);
    const int s = sign_term(log_ppl_0, rewrite_log_ppls);

    const double mu = mean(rewrite_log_ppls);
    double var = 0.0;
    for (double v : rewrite_log_ppls) {
        const double d = v - mu;
        var += d * d;
    }
    var /= static_cast<double>(rewrite_log_ppls.size());

    double rho = var == 0.0 ? rho_cap : m / var;
    rho = std::clamp(rho, 0.0, rho_cap);

    ExpansionResult out;
    out.rho = rho;
    out.score_e = checked_score(std::exp(s * rho * m) * log_ppl_0, "expansion score");
    return out;
}

Label classify(double score, double threshold) {
    return score >= threshold ? Label::Human : Label::Machine;
}

VaryBalanceScore detect(const TextSample& sample, const DetectorConfig& cfg,
                        RewriteProvider& rewriter, ScorerProvider& scorer,
                        CacheStore* cache, InflightLimiter* limiter) {
    cfg.validate();
    auto stage = [&](const char* name) { return "sample " + sample.id() + " [" + name + "]"; };

    RewriteBundle bundle = [&] {
        try {
            return rewrite_k(sample, cfg.n_rewrites, rewriter, cfg.prompt, cfg.params, cache,
                             limiter);
        } catch (const VbError& e) {
            throw VbError::with_context(e, stage("rewrite"));
        }
    }();

    VaryBalanceScore result;
    result.sample_id = sample.id();
    result.variant = cfg.variant;
    try {
        result.log_ppl_0 =
            log_ppl(score_tokens_cached(sample.content(), scorer, cache, limiter,
                                        cfg.min_tokens),
                    cfg.min_tokens);
    } catch (const VbError& e) {
        throw VbError::with_context(e, stage("score original"));
    }
    for (const Rewrite& rewrite : bundle.rewrites()) {
        try {
            result.rewrite_log_ppls.push_back(
                log_ppl(score_tokens_cached(rewrite.text, scorer, cache, limiter,
                                            cfg.min_tokens),
                        cfg.min_tokens));
        } catch (const VbError& e) {
            throw VbError::with_context(
                e, stage(("score rewrite " + std::to_string(rewrite.index)).c_str()));
        }
    }

    try {
        result.msd = msd(result.log_ppl_0, result.rewrite_log_ppls);
        result.sign = sign_term(result.log_ppl_0, result.rewrite_log_ppls);
        result.score = base_score(result.log_ppl_0, result.rewrite_log_ppls);
        if (cfg.variant == Variant::Expansion) {
            const ExpansionResult ex =
                expansion_score(result.log_ppl_0, result.rewrite_log_ppls, cfg.rho_cap);
            result.rho = ex.rho;
            result.score_e = ex.score_e;
        }
    } catch (const VbError& e) {
        throw VbError::with_context(e, stage("score math"));
    }
    return result;
}

} // namespace vb
