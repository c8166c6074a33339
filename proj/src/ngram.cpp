#include "varybalance/ngram.hpp"

#include "varybalance/errors.hpp"
#include "varybalance/util.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace vb {

const char* to_string(TokenizerMode mode) {
    return mode == TokenizerMode::Whitespace ? "whitespace" : "character";
}

TokenizerMode tokenizer_mode_from_string(const std::string& s) {
    if (s == "whitespace") return TokenizerMode::Whitespace;
    if (s == "character") return TokenizerMode::Character;
    raise(ErrorKind::ParseError, "unknown tokenizer mode '" + s + "'");
}

std::vector<std::string> tokenize(std::string_view text, TokenizerMode mode) {
    return mode == TokenizerMode::Whitespace ? split_whitespace(text)
                                             : split_codepoints(text);
}

NGramModel::NGramModel(int order, double smoothing, TokenizerMode mode)
    : order_(order), smoothing_(smoothing), mode_(mode) {
    if (order_ < 1 || order_ > 3) raise(ErrorKind::ConfigError, "order must be in {1,2,3}");
    if (!(smoothing_ > 0.0)) raise(ErrorKind::ConfigError, "smoothing constant must be > 0");
}

NGramModel NGramModel::fit(const std::vector<std::string>& corpus, int order,
                           double smoothing, TokenizerMode mode) {
    if (corpus.empty()) raise(ErrorKind::EmptyCorpus, "n-gram fit needs a non-empty corpus");
    NGramModel model(order, smoothing, mode);
    for (const auto& text : corpus) {
        auto tokens = tokenize(text, mode);
        for (const auto& tok : tokens) {
            ++model.vocab_[tok];
            ++model.total_tokens_;
        }
        const std::size_t skip = static_cast<std::size_t>(order) - 1;
        for (std::size_t i = skip; i < tokens.size(); ++i) {
            std::vector<std::string> context(tokens.begin() + (i - skip),
                                             tokens.begin() + i);
            ++model.context_totals_[context];
            ++model.ngram_counts_[context][tokens[i]];
        }
    }
    model.finalize();
    return model;
}

double NGramModel::logprob(const std::vector<std::string>& context,
                           const std::string& token) const {
    const double k = smoothing_;
    const double v = static_cast<double>(vocab_.size());
    double ngram_count = 0.0;
    double context_total = 0.0;
    auto ctx_it = context_totals_.find(context);
    if (ctx_it != context_totals_.end()) {
        context_total = static_cast<double>(ctx_it->second);
        const auto& counts = ngram_counts_.at(context);
        auto tok_it = counts.find(token);
        if (tok_it != counts.end()) ngram_count = static_cast<double>(tok_it->second);
    }
    return std::log((ngram_count + k) / (context_total + k * v));
}

std::string NGramModel::serialize() const {
    json contexts = json::array();
    for (const auto& [context, total] : context_totals_) {
        json counts = json::object();
        for (const auto& [tok, n] : ngram_counts_.at(context)) {
            counts[tok] = n;
        }
        contexts.push_back(
            {{"context", context}, {"total", total}, {"counts", std::move(counts)}});
    }
    json vocab = json::object();
    for (const auto& [tok, n] : vocab_) vocab[tok] = n;
    json j{{"format_version", 1},
           {"order", order_},
           {"smoothing", smoothing_},
           {"tokenizer", to_string(mode_)},
           {"total_tokens", total_tokens_},
           {"vocab", std::move(vocab)},
           {"contexts", std::move(contexts)}};
    return j.dump();
}

NGramModel NGramModel::deserialize(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        raise(ErrorKind::ParseError, std::string("bad n-gram model: ") + e.what());
    }
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1) {
        raise(ErrorKind::ParseError, "unsupported n-gram model format version");
    }
    NGramModel model(j.at("order").get<int>(), j.at("smoothing").get<double>(),
                     tokenizer_mode_from_string(j.at("tokenizer").get<std::string>()));
    model.total_tokens_ = j.at("total_tokens").get<std::uint64_t>();
    for (const auto& [tok, n] : j.at("vocab").items()) {
        model.vocab_[tok] = n.get<std::uint64_t>();
    }
    for (const auto& entry : j.at("contexts")) {
        auto context = entry.at("context").get<std::vector<std::string>>();
        model.context_totals_[context] = entry.at("total").get<std::uint64_t>();
        auto& counts = model.ngram_counts_[context];
        for (const auto& [tok, n] : entry.at("counts").items()) {
            counts[tok] = n.get<std::uint64_t>();
        }
    }
    model.finalize();
    return model;
}

void NGramModel::finalize() {
    if (vocab_.empty()) raise(ErrorKind::EmptyCorpus, "n-gram model has empty vocabulary");
    std::ostringstream id;
    id << "ngram-o" << order_ << "-" << to_string(mode_) << "-k" << format_double(smoothing_)
       << "-" << sha256_hex(serialize()).substr(0, 12);
    model_id_ = id.str();
}

void NGramModel::save(const std::filesystem::path& path) const {
    atomic_write_file(path, serialize());
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
    return deserialize(read_file(path));
}

NGramScorerProvider::NGramScorerProvider(NGramModel model) : model_(std::move(model)) {}

TokenLogProbs NGramScorerProvider::score(const std::string& text) {
    record_call();
    auto tokens = tokenize(text, model_.mode());
    const int skip = model_.order() - 1;
    if (static_cast<int>(tokens.size()) <= skip) {
        raise(ErrorKind::TooShort, "text has no scorable tokens under order " +
                                       std::to_string(model_.order()));
    }
    std::vector<std::string> scored(tokens.begin() + skip, tokens.end());
    std::vector<double> logprobs;
    logprobs.reserve(scored.size());
    for (std::size_t i = static_cast<std::size_t>(skip); i < tokens.size(); ++i) {
        std::vector<std::string> context(tokens.begin() + (i - skip), tokens.begin() + i);
        logprobs.push_back(model_.logprob(context, tokens[i]));
    }
    return TokenLogProbs(scorer_id(), std::move(scored), std::move(logprobs), skip);
}

} // namespace vb
