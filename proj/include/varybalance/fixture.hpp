#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "varybalance/dataset.hpp"
#include "varybalance/rewriter.hpp"

namespace vb {

struct FixtureOptions {
    int n_pairs = 400;
    std::uint64_t seed = 7;
    int k = 3;
    double rho_cap = 50.0;
};

struct FixtureData {
    std::vector<PairedSample> pairs;
    std::vector<TextSample> train_corpus;
    SynonymTable synonyms;
};

// Synthetic corpus with a planted class signal. Human-labeled answers draw
// from a pool of low-frequency words whose synonym replacements are very
// frequent, so mock rewrites drop their log-perplexity hard; machine
// answers draw from frequent words whose replacements are only slightly
// rarer, so rewrites barely move. Scored with a unigram model fit on the
// emitted training corpus, the original texts land in two disjoint
// log-perplexity bands and the rewrite deviation differs by more than an
// order of magnitude between classes.
FixtureData make_fixture(const FixtureOptions& opts = {});

// Writes the fixture as ready-to-run files: train_corpus.jsonl,
// paired.jsonl, corpus.jsonl (flattened), synonyms.json, and config.json
// wiring the mock rewriter and the unigram scorer together.
void write_fixture(const std::filesystem::path& dir, const FixtureOptions& opts = {});

} // namespace vb
