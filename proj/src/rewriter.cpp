#include "varybalance/rewriter.hpp"

#include "varybalance/cache.hpp"
#include "varybalance/concurrency.hpp"
#include "varybalance/errors.hpp"
#include "varybalance/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

namespace vb {

const SynonymTable& default_synonyms() {
    static const SynonymTable table = {
        {"also", "additionally"}, {"ask", "request"},   {"begin", "start"},
        {"big", "large"},         {"but", "however"},   {"easy", "simple"},
        {"end", "finish"},        {"fast", "quick"},    {"find", "locate"},
        {"get", "obtain"},        {"give", "provide"},  {"glad", "happy"},
        {"hard", "difficult"},    {"help", "assist"},   {"important", "significant"},
        {"keep", "retain"},       {"make", "create"},   {"many", "numerous"},
        {"need", "require"},      {"new", "novel"},     {"often", "frequently"},
        {"show", "display"},      {"slow", "sluggish"}, {"small", "little"},
        {"so", "therefore"},      {"tell", "inform"},   {"think", "believe"},
        {"use", "employ"},        {"very", "extremely"},
    };
    return table;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Each unit is one sentence including its terminator run and any trailing
// whitespace; a final unterminated fragment becomes the last unit.
std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_terminator(text[i])) {
            ++i;
            while (i < text.size() && is_terminator(text[i])) ++i;
            while (i < text.size() && is_space(text[i])) ++i;
            out.push_back(text.substr(start, i - start));
            start = i;
        } else {
            ++i;
        }
    }
    if (start < text.size()) out.push_back(text.substr(start));
    return out;
}

struct Candidate {
    std::size_t sentence;
    std::size_t begin; // stem offset within the sentence
    std::size_t length;
    const std::string* replacement;
};

bool is_word_punct(char c) {
    return is_terminator(c) || c == ',' || c == ';' || c == ':' || c == '\'' || c == '"' ||
           c == '(' || c == ')';
}

std::vector<Candidate> find_candidates(const std::vector<std::string>& sentences,
                                       const SynonymTable& table) {
    std::vector<Candidate> out;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        const std::string& sent = sentences[s];
        std::size_t i = 0;
        while (i < sent.size()) {
            if (is_space(sent[i])) {
                ++i;
                continue;
            }
            std::size_t end = i;
            while (end < sent.size() && !is_space(sent[end])) ++end;
            std::size_t lo = i;
            std::size_t hi = end;
            while (lo < hi && is_word_punct(sent[lo])) ++lo;
            while (hi > lo && is_word_punct(sent[hi - 1])) --hi;
            if (hi > lo) {
                auto it = table.find(sent.substr(lo, hi - lo));
                if (it != table.end() && it->second != it->first) {
                    out.push_back({s, lo, hi - lo, &it->second});
                }
            }
            i = end;
        }
    }
    return out;
}

void apply_substitutions(std::vector<std::string>& sentences,
                         const std::vector<const Candidate*>& chosen) {
    // Back to front within each sentence so earlier offsets stay valid.
    for (auto it = chosen.rbegin(); it != chosen.rend(); ++it) {
        const Candidate& c = **it;
        sentences[c.sentence].replace(c.begin, c.length, *c.replacement);
    }
}

std::string join_sentences(const std::vector<std::string>& sentences,
                           const std::vector<std::size_t>& order) {
    std::string out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::string& unit = sentences[order[i]];
        out += unit;
        if (i + 1 < order.size() && !unit.empty() && !is_space(unit.back())) out += ' ';
    }
    return out;
}

std::size_t distinct_count(const std::vector<std::string>& sentences) {
    return std::set<std::string>(sentences.begin(), sentences.end()).size();
}

} // namespace

std::string mock_rewrite(const std::string& text, int index, std::uint64_t seed,
                         const SynonymTable& table) {
    if (trim(text).empty()) raise(ErrorKind::InvalidText, "mock_rewrite needs non-blank text");

    std::uint64_t state = fnv1a64(text);
    state ^= 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 0x51ED2701);
    state += splitmix64(seed);
    DetRng rng(state);

    const std::vector<std::string> sentences = split_sentences(text);
    if (sentences.empty()) return text;

    const std::vector<Candidate> candidates = find_candidates(sentences, table);
    const bool reorderable = sentences.size() >= 2 && distinct_count(sentences) >= 2;
    const std::size_t perturbable =
        candidates.size() + (reorderable ? sentences.size() : 0);

    std::vector<const Candidate*> chosen;
    for (const Candidate& c : candidates) {
        if (rng.next_bool()) chosen.push_back(&c);
    }

    std::vector<std::string> edited = sentences;
    apply_substitutions(edited, chosen);

    std::vector<std::size_t> order(sentences.size());
    std::iota(order.begin(), order.end(), 0);
    if (reorderable) {
        rng.shuffle(order);
        if (std::is_sorted(order.begin(), order.end())) {
            std::rotate(order.begin(), order.begin() + 1, order.end());
        }
    }

    std::string result = join_sentences(edited, order);
    if (result != text) return result;
    if (perturbable < 2) return text;

    // The random pass landed back on the input; force one perturbation.
    if (!candidates.empty()) {
        std::vector<std::string> forced = sentences;
        apply_substitutions(forced, {&candidates.front()});
        result = join_sentences(forced, order);
    } else {
        std::rotate(order.begin(), order.begin() + 1, order.end());
        result = join_sentences(edited, order);
    }
    return result == text ? text : result;
}

MockRewriteProvider::MockRewriteProvider(std::uint64_t seed)
    : seed_(seed), table_(default_synonyms()), id_("mock-s" + std::to_string(seed)) {}

MockRewriteProvider::MockRewriteProvider(std::uint64_t seed, SynonymTable table)
    : seed_(seed), table_(std::move(table)) {
    json j = json::object();
    for (const auto& [word, replacement] : table_) j[word] = replacement;
    id_ = "mock-s" + std::to_string(seed) + "-t" + sha256_hex(j.dump()).substr(0, 12);
}

std::string MockRewriteProvider::rewrite(const std::string& text, const std::string&,
                                         int index, const GenParams&) {
    record_call();
    return mock_rewrite(text, index, seed_, table_);
}

std::string IdentityRewriteProvider::rewrite(const std::string& text, const std::string&,
                                             int, const GenParams&) {
    record_call();
    return text;
}

RewriteBundle rewrite_k(const TextSample& sample, int k, RewriteProvider& provider,
                        const std::string& prompt, const GenParams& params,
                        CacheStore* cache, InflightLimiter* limiter, int empty_retry_limit) {
    if (trim(sample.content()).empty()) {
        raise(ErrorKind::InvalidText, "sample " + sample.id() + " has blank content");
    }
    if (k < 1) raise(ErrorKind::ConfigError, "k must be >= 1, got " + std::to_string(k));

    const std::string pdigest = params_digest(params);
    std::vector<Rewrite> rewrites;
    rewrites.reserve(static_cast<std::size_t>(k));
    for (int index = 1; index <= k; ++index) {
        CacheKey key{CacheKind::Rewrite, provider.rewriter_id(), "",
                     prompt,             pdigest,               sample.content_digest(),
                     index};
        if (cache) {
            if (auto hit = cache->get(key)) {
                rewrites.push_back({index, (*hit)["text"].get<std::string>()});
                continue;
            }
        }
        std::string text;
        bool ok = false;
        const int attempts = 1 + std::max(0, empty_retry_limit);
        for (int attempt = 1; attempt <= attempts && !ok; ++attempt) {
            std::string got;
            {
                InflightLimiter::Guard guard(limiter);
                got = provider.rewrite(sample.content(), prompt, index, params);
            }
            if (!trim(got).empty()) {
                text = std::move(got);
                ok = true;
            } else if (attempt < attempts) {
                warnln("blank rewrite for sample " + sample.id() + " index " +
                       std::to_string(index) + "; retrying");
            }
        }
        if (!ok) {
            raise(ErrorKind::EmptyRewrite,
                  "provider returned only blank rewrites for sample " + sample.id() +
                      " index " + std::to_string(index) + " after " +
                      std::to_string(attempts) + " attempts");
        }
        if (cache) cache->put(key, json{{"text", text}});
        rewrites.push_back({index, text});
    }
    return RewriteBundle(sample.id(), provider.rewriter_id(), prompt, params,
                         std::move(rewrites));
}

} // namespace vb
