#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vb {

using json = nlohmann::json;

enum class Label { Human, Machine, Unknown };

const char* to_string(Label label);
Label label_from_string(const std::string& s);

enum class Variant { Base, Expansion };

const char* to_string(Variant variant);
Variant variant_from_string(const std::string& s);

// The exact rewrite instruction sent by default. Kept as a single constant
// so provenance records, cache keys, and the CLI all agree byte-for-byte.
inline constexpr const char* kDefaultRewritePrompt = "Revise this text.";

// One labeled or unlabeled document under analysis. Immutable after
// construction; equality is id + content digest (label and metadata are
// provenance, not identity).
class TextSample {
public:
    TextSample(std::string id, std::string content, Label label = Label::Unknown,
               std::string lang = "", std::string source = "");

    const std::string& id() const { return id_; }
    const std::string& content() const { return content_; }
    Label label() const { return label_; }
    const std::string& lang() const { return lang_; }
    const std::string& source() const { return source_; }

    // SHA-256 of the UTF-8 content, computed once at construction. Also the
    // text digest used in cache keys.
    const std::string& content_digest() const { return content_digest_; }

    friend bool operator==(const TextSample& a, const TextSample& b) {
        return a.id_ == b.id_ && a.content_digest_ == b.content_digest_;
    }
    friend bool operator!=(const TextSample& a, const TextSample& b) { return !(a == b); }

private:
    std::string id_;
    std::string content_;
    Label label_;
    std::string lang_;
    std::string source_;
    std::string content_digest_;
};

// Sampling parameters recorded verbatim in provenance and cache keys.
struct GenParams {
    double temperature = 1.0;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed;

    friend bool operator==(const GenParams&, const GenParams&) = default;
};

json gen_params_to_json(const GenParams& params);
GenParams gen_params_from_json(const json& j);

// k rewrites of one sample plus full generation provenance.
struct Rewrite {
    int index = 0; // 1-based
    std::string text;

    friend bool operator==(const Rewrite&, const Rewrite&) = default;
};

class RewriteBundle {
public:
    RewriteBundle(std::string sample_id, std::string rewriter_id, std::string prompt,
                  GenParams params, std::vector<Rewrite> rewrites);

    const std::string& sample_id() const { return sample_id_; }
    const std::string& rewriter_id() const { return rewriter_id_; }
    const std::string& prompt() const { return prompt_; }
    const GenParams& params() const { return params_; }
    const std::vector<Rewrite>& rewrites() const { return rewrites_; }
    int k() const { return static_cast<int>(rewrites_.size()); }

    json to_json() const;
    static RewriteBundle from_json(const json& j);

    friend bool operator==(const RewriteBundle&, const RewriteBundle&) = default;

private:
    std::string sample_id_;
    std::string rewriter_id_;
    std::string prompt_;
    GenParams params_;
    std::vector<Rewrite> rewrites_;
};

// Per-token natural-log probabilities from a scorer provider. Tokens the
// provider could not condition (typically a leading prefix) are excluded
// from the lists and counted in skipped_prefix.
class TokenLogProbs {
public:
    TokenLogProbs(std::string scorer_id, std::vector<std::string> tokens,
                  std::vector<double> logprobs, int skipped_prefix);

    const std::string& scorer_id() const { return scorer_id_; }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::vector<double>& logprobs() const { return logprobs_; }
    int skipped_prefix() const { return skipped_prefix_; }
    std::size_t size() const { return tokens_.size(); }

    json to_json() const;
    static TokenLogProbs from_json(const json& j);

    friend bool operator==(const TokenLogProbs&, const TokenLogProbs&) = default;

private:
    std::string scorer_id_;
    std::vector<std::string> tokens_;
    std::vector<double> logprobs_;
    int skipped_prefix_;
};

// Every intermediate quantity of one detection, plus the final scores.
// rho and score_e are present only for the expansion variant.
struct VaryBalanceScore {
    std::string sample_id;
    double log_ppl_0 = 0.0;
    std::vector<double> rewrite_log_ppls;
    double msd = 0.0;
    int sign = 0;
    std::optional<double> rho;
    double score = 0.0;
    std::optional<double> score_e;
    Variant variant = Variant::Base;

    json to_json() const;
    static VaryBalanceScore from_json(const json& j);

    friend bool operator==(const VaryBalanceScore&, const VaryBalanceScore&) = default;
};

// Detection knobs shared across the pipeline. Provider and cache settings
// live in config::RunConfig; this is the math-facing subset passed to
// detect().
struct DetectorConfig {
    int n_rewrites = 3;
    Variant variant = Variant::Base;
    double rho_cap = 1000.0;
    int min_tokens = 8;
    std::optional<double> threshold;
    std::string prompt = kDefaultRewritePrompt;
    GenParams params;

    // Raises ConfigError when a field is out of bounds.
    void validate() const;
};

} // namespace vb
