#include "varybalance/types.hpp"

#include "varybalance/errors.hpp"
#include "varybalance/util.hpp"

#include <json.hpp>

#include <cmath>

namespace vb {

const char* to_string(Label label) {
    switch (label) {
        case Label::Human: return "human";
        case Label::Machine: return "machine";
        case Label::Unknown: return "unknown";
    }
    return "unknown";
}

Label label_from_string(const std::string& s) {
    if (s == "human") return Label::Human;
    if (s == "machine") return Label::Machine;
    if (s == "unknown" || s.empty()) return Label::Unknown;
    raise(ErrorKind::ParseError, "unknown label '" + s + "'");
}

const char* to_string(Variant variant) {
    return variant == Variant::Base ? "base" : "expansion";
}

Variant variant_from_string(const std::string& s) {
    if (s == "base") return Variant::Base;
    if (s == "expansion") return Variant::Expansion;
    raise(ErrorKind::ParseError, "unknown variant '" + s + "'");
}

TextSample::TextSample(std::string id, std::string content, Label label,
                       std::string lang, std::string source)
    : id_(std::move(id)),
      content_(std::move(content)),
      label_(label),
      lang_(std::move(lang)),
      source_(std::move(source)) {
    if (id_.empty()) raise(ErrorKind::InvalidText, "sample id must be non-empty");
    if (trim(content_).empty()) {
        raise(ErrorKind::InvalidText, "sample '" + id_ + "' has empty content");
    }
    content_digest_ = sha256_hex(content_);
}

json gen_params_to_json(const GenParams& params) {
    json j;
    j["temperature"] = params.temperature;
    j["max_tokens"] = params.max_tokens;
    j["seed"] = params.seed.has_value() ? json(*params.seed) : json(nullptr);
    return j;
}

GenParams gen_params_from_json(const json& j) {
    GenParams p;
    p.temperature = j.at("temperature").get<double>();
    p.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("seed") && !j.at("seed").is_null()) {
        p.seed = j.at("seed").get<std::int64_t>();
    }
    return p;
}

RewriteBundle::RewriteBundle(std::string sample_id, std::string rewriter_id,
                             std::string prompt, GenParams params,
                             std::vector<Rewrite> rewrites)
    : sample_id_(std::move(sample_id)),
      rewriter_id_(std::move(rewriter_id)),
      prompt_(std::move(prompt)),
      params_(params),
      rewrites_(std::move(rewrites)) {
    if (rewrites_.empty()) raise(ErrorKind::EmptyRewrites, "bundle needs k >= 1 rewrites");
    for (std::size_t i = 0; i < rewrites_.size(); ++i) {
        if (rewrites_[i].index != static_cast<int>(i) + 1) {
            raise(ErrorKind::ParseError, "rewrite indices must be contiguous 1..k");
        }
        if (trim(rewrites_[i].text).empty()) {
            raise(ErrorKind::EmptyRewrite,
                  "rewrite " + std::to_string(i + 1) + " of sample '" + sample_id_ +
                      "' is empty");
        }
    }
}

json RewriteBundle::to_json() const {
    json arr = json::array();
    for (const auto& rw : rewrites_) {
        arr.push_back({{"index", rw.index}, {"text", rw.text}});
    }
    return json{{"sample_id", sample_id_},
                {"rewriter_id", rewriter_id_},
                {"prompt", prompt_},
                {"params", gen_params_to_json(params_)},
                {"rewrites", std::move(arr)}};
}

RewriteBundle RewriteBundle::from_json(const json& j) {
    std::vector<Rewrite> rewrites;
    for (const auto& r : j.at("rewrites")) {
        rewrites.push_back({r.at("index").get<int>(), r.at("text").get<std::string>()});
    }
    return RewriteBundle(j.at("sample_id").get<std::string>(),
                         j.at("rewriter_id").get<std::string>(),
                         j.at("prompt").get<std::string>(),
                         gen_params_from_json(j.at("params")), std::move(rewrites));
}

TokenLogProbs::TokenLogProbs(std::string scorer_id, std::vector<std::string> tokens,
                             std::vector<double> logprobs, int skipped_prefix)
    : scorer_id_(std::move(scorer_id)),
      tokens_(std::move(tokens)),
      logprobs_(std::move(logprobs)),
      skipped_prefix_(skipped_prefix) {
    if (tokens_.size() != logprobs_.size()) {
        raise(ErrorKind::ProviderError, "token/logprob length mismatch");
    }
    if (tokens_.empty()) {
        raise(ErrorKind::TooShort, "no scored tokens after skipping prefix");
    }
    if (skipped_prefix_ < 0) {
        raise(ErrorKind::ProviderError, "negative skipped_prefix");
    }
    for (double lp : logprobs_) {
        if (!std::isfinite(lp) || lp > 0.0) {
            raise(ErrorKind::ProviderError,
                  "logprob " + format_double(lp) + " is not a finite value <= 0");
        }
    }
}

json TokenLogProbs::to_json() const {
    return json{{"scorer_id", scorer_id_},
                {"tokens", tokens_},
                {"logprobs", logprobs_},
                {"skipped_prefix", skipped_prefix_}};
}

TokenLogProbs TokenLogProbs::from_json(const json& j) {
    return TokenLogProbs(j.at("scorer_id").get<std::string>(),
                         j.at("tokens").get<std::vector<std::string>>(),
                         j.at("logprobs").get<std::vector<double>>(),
                         j.at("skipped_prefix").get<int>());
}

json VaryBalanceScore::to_json() const {
    json j;
    j["sample_id"] = sample_id;
    j["log_ppl_0"] = log_ppl_0;
    j["rewrite_log_ppls"] = rewrite_log_ppls;
    j["msd"] = msd;
    j["sign"] = sign;
    j["rho"] = rho.has_value() ? json(*rho) : json(nullptr);
    j["score"] = score;
    j["score_e"] = score_e.has_value() ? json(*score_e) : json(nullptr);
    j["variant"] = to_string(variant);
    return j;
}

VaryBalanceScore VaryBalanceScore::from_json(const json& j) {
    VaryBalanceScore s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.log_ppl_0 = j.at("log_ppl_0").get<double>();
    s.rewrite_log_ppls = j.at("rewrite_log_ppls").get<std::vector<double>>();
    s.msd = j.at("msd").get<double>();
    s.sign = j.at("sign").get<int>();
    if (!j.at("rho").is_null()) s.rho = j.at("rho").get<double>();
    s.score = j.at("score").get<double>();
    if (!j.at("score_e").is_null()) s.score_e = j.at("score_e").get<double>();
    s.variant = variant_from_string(j.at("variant").get<std::string>());
    return s;
}

void DetectorConfig::validate() const {
    if (n_rewrites < 1) raise(ErrorKind::ConfigError, "n_rewrites must be >= 1");
    if (!(rho_cap > 0.0)) raise(ErrorKind::ConfigError, "rho_cap must be > 0");
    if (min_tokens < 1) raise(ErrorKind::ConfigError, "min_tokens must be >= 1");
    if (variant == Variant::Expansion && n_rewrites < 2) {
        raise(ErrorKind::ConfigError, "expansion variant needs n_rewrites >= 2");
    }
    if (threshold.has_value() && !std::isfinite(*threshold)) {
        raise(ErrorKind::ConfigError, "threshold must be finite");
    }
    if (!(params.temperature >= 0.0)) {
        raise(ErrorKind::ConfigError, "temperature must be >= 0");
    }
    if (params.max_tokens < 1) raise(ErrorKind::ConfigError, "max_tokens must be >= 1");
}

} // namespace vb
