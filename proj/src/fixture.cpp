#include "varybalance/fixture.hpp"

#include "varybalance/config.hpp"
#include "varybalance/errors.hpp"
#include "varybalance/util.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>

namespace vb {

namespace {

// Planted vocabulary. Train-corpus counts are chosen so that one
// substitution moves a 28-token text's log-perplexity by ln(421/31)/28 for
// the human pool but only ln(184/281)/28 for the machine pool, and so that
// the two pools put original texts in disjoint log-perplexity bands.
constexpr std::array<const char*, 16> kCommon = {
    "the",  "of",   "and",  "to",    "in",   "for",  "with",    "on",
    "by",   "from", "about", "into", "over", "after", "under", "between"};

constexpr std::array<const char*, 12> kHumanWords = {
    "gleam", "quirk", "muddle", "wisp", "tangle", "fizz",
    "grit",  "lull",  "snag",   "husk", "dollop", "smudge"};
constexpr std::array<const char*, 12> kHumanReplacements = {
    "shine", "habit", "mixture", "trace", "knot",    "spark",
    "sand",  "pause", "issue",   "shell", "portion", "mark"};

constexpr std::array<const char*, 12> kMachineWords = {
    "leverage",   "utilize",    "facilitate", "optimize", "streamline", "robust",
    "scalable",   "comprehensive", "innovative", "seamless", "efficient", "holistic"};
constexpr std::array<const char*, 12> kMachineReplacements = {
    "harness",    "employ",   "expedite",  "refine", "simplify", "sturdy",
    "extensible", "thorough", "inventive", "smooth", "effective", "unified"};

constexpr std::uint64_t kCommonCount = 400;
constexpr std::uint64_t kHumanWordCount = 30;
constexpr std::uint64_t kHumanReplacementCount = 420;
constexpr std::uint64_t kMachineWordCount = 280;
constexpr std::uint64_t kMachineReplacementCount = 183;
constexpr std::uint64_t kPeriodCount = 800;

TextSample train_doc(const std::string& word, std::uint64_t count) {
    std::string text;
    text.reserve(count * (word.size() + 1));
    for (std::uint64_t i = 0; i < count; ++i) {
        if (i > 0) text += ' ';
        text += word;
    }
    return TextSample(word == "." ? "train-period" : "train-" + word, text, Label::Unknown,
                      "en", "fixture");
}

// Four sentences, each three pool words and three common words in random
// order, closed by a standalone period: 28 whitespace tokens.
template <std::size_t N>
std::string make_text(const std::array<const char*, N>& pool, DetRng& rng) {
    static_assert(N == 12);
    std::vector<const char*> slots(pool.begin(), pool.end());
    rng.shuffle(slots);

    std::string text;
    for (int sentence = 0; sentence < 4; ++sentence) {
        std::vector<const char*> words(slots.begin() + sentence * 3,
                                       slots.begin() + sentence * 3 + 3);
        for (int c = 0; c < 3; ++c) {
            words.push_back(kCommon[static_cast<std::size_t>(rng.next_below(kCommon.size()))]);
        }
        rng.shuffle(words);
        if (sentence > 0) text += ' ';
        for (std::size_t w = 0; w < words.size(); ++w) {
            if (w > 0) text += ' ';
            text += words[w];
        }
        text += " .";
    }
    return text;
}

} // namespace

FixtureData make_fixture(const FixtureOptions& opts) {
    if (opts.n_pairs < 1) {
        raise(ErrorKind::ConfigError,
              "fixture needs >= 1 pair, got " + std::to_string(opts.n_pairs));
    }

    FixtureData data;
    for (std::size_t i = 0; i < kHumanWords.size(); ++i) {
        data.synonyms[kHumanWords[i]] = kHumanReplacements[i];
        data.synonyms[kMachineWords[i]] = kMachineReplacements[i];
    }

    for (const char* word : kCommon) data.train_corpus.push_back(train_doc(word, kCommonCount));
    for (const char* word : kHumanWords) {
        data.train_corpus.push_back(train_doc(word, kHumanWordCount));
    }
    for (const char* word : kHumanReplacements) {
        data.train_corpus.push_back(train_doc(word, kHumanReplacementCount));
    }
    for (const char* word : kMachineWords) {
        data.train_corpus.push_back(train_doc(word, kMachineWordCount));
    }
    for (const char* word : kMachineReplacements) {
        data.train_corpus.push_back(train_doc(word, kMachineReplacementCount));
    }
    data.train_corpus.push_back(train_doc(".", kPeriodCount));

    std::uint64_t state = opts.seed;
    DetRng rng(splitmix64(state));
    data.pairs.reserve(static_cast<std::size_t>(opts.n_pairs));
    for (int i = 0; i < opts.n_pairs; ++i) {
        char pair_id[16];
        std::snprintf(pair_id, sizeof pair_id, "pair-%04d", i);
        const std::string question =
            "Describe collection " + std::to_string(i) + " in a few sentences.";
        data.pairs.push_back(PairedSample{
            pair_id, question,
            TextSample(std::string(pair_id) + "#human", make_text(kHumanWords, rng),
                       Label::Human, "en", "fixture"),
            TextSample(std::string(pair_id) + "#machine", make_text(kMachineWords, rng),
                       Label::Machine, "en", "fixture")});
    }
    return data;
}

void write_fixture(const std::filesystem::path& dir, const FixtureOptions& opts) {
    const FixtureData data = make_fixture(opts);
    std::filesystem::create_directories(dir);

    save_corpus(data.train_corpus, dir / "train_corpus.jsonl");
    save_paired(data.pairs, dir / "paired.jsonl");
    save_corpus(flatten(data.pairs), dir / "corpus.jsonl");

    json synonyms = json::object();
    for (const auto& [word, replacement] : data.synonyms) synonyms[word] = replacement;
    atomic_write_file(dir / "synonyms.json", synonyms.dump(2) + "\n");

    RunConfig cfg;
    cfg.detector.n_rewrites = opts.k;
    cfg.detector.variant = Variant::Expansion;
    cfg.detector.rho_cap = opts.rho_cap;
    cfg.seed = opts.seed;
    cfg.scorer.kind = "ngram";
    cfg.scorer.train_corpus = "train_corpus.jsonl";
    cfg.scorer.order = 1;
    cfg.scorer.smoothing = 1.0;
    cfg.scorer.tokenizer = "whitespace";
    cfg.rewriter.kind = "mock";
    cfg.rewriter.seed = opts.seed;
    cfg.rewriter.synonyms_path = "synonyms.json";
    atomic_write_file(dir / "config.json", cfg.to_json().dump(2) + "\n");
}

} // namespace vb
