#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "varybalance/scorer.hpp"
#include "varybalance/types.hpp"

namespace vb {

enum class TokenizerMode { Whitespace, Character };

const char* to_string(TokenizerMode mode);
TokenizerMode tokenizer_mode_from_string(const std::string& s);

std::vector<std::string> tokenize(std::string_view text, TokenizerMode mode);

// Deterministic add-k n-gram language model used as the offline scorer.
// Probabilities are add-k smoothed over the fitted vocabulary:
//
//   P(w | ctx) = (count(ctx, w) + k) / (count(ctx) + k * |V|)
//
// where |V| is the number of distinct fitted token types. Tokens outside
// the vocabulary get the k-mass numerator, so every probability is in
// (0, 1) for k > 0. The first order-1 tokens of a text have no full
// context and are skipped (reported as skipped_prefix).
class NGramModel {
public:
    NGramModel(int order, double smoothing, TokenizerMode mode);

    int order() const { return order_; }
    double smoothing() const { return smoothing_; }
    TokenizerMode mode() const { return mode_; }
    std::size_t vocab_size() const { return vocab_.size(); }
    std::uint64_t total_tokens() const { return total_tokens_; }
    const std::map<std::string, std::uint64_t>& vocab() const { return vocab_; }

    // Natural-log conditional probability of `token` after `context`
    // (context length = order-1; empty for unigram).
    double logprob(const std::vector<std::string>& context, const std::string& token) const;

    // Stable identifier derived from the serialized model, so identical
    // fits share cache entries and different fits never collide.
    const std::string& model_id() const { return model_id_; }

    // Versioned deterministic serialization; identical fits are
    // byte-identical.
    std::string serialize() const;
    static NGramModel deserialize(const std::string& text);

    void save(const std::filesystem::path& path) const;
    static NGramModel load(const std::filesystem::path& path);

    static NGramModel fit(const std::vector<std::string>& corpus, int order,
                          double smoothing, TokenizerMode mode);

private:
    void finalize();

    int order_;
    double smoothing_;
    TokenizerMode mode_;
    std::uint64_t total_tokens_ = 0;
    std::map<std::string, std::uint64_t> vocab_;
    // Context tables keyed on the joined context token list. std::map keeps
    // serialization ordering deterministic.
    std::map<std::vector<std::string>, std::uint64_t> context_totals_;
    std::map<std::vector<std::string>, std::map<std::string, std::uint64_t>> ngram_counts_;
    std::string model_id_;
};

// ScorerProvider backed by an NGramModel. Immutable and safe to share.
class NGramScorerProvider final : public ScorerProvider {
public:
    explicit NGramScorerProvider(NGramModel model);

    std::string scorer_id() const override { return model_.model_id(); }
    TokenLogProbs score(const std::string& text) override;

    const NGramModel& model() const { return model_; }

private:
    NGramModel model_;
};

} // namespace vb
