#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "varybalance/types.hpp"

namespace vb {

class CacheStore;
class InflightLimiter;
class RewriteProvider;

// Line-record corpus: one JSON object per line with fields id, text,
// label ("human" | "machine" | null), lang, source.
std::vector<TextSample> load_corpus(const std::filesystem::path& path);
void save_corpus(const std::vector<TextSample>& samples, const std::filesystem::path& path);

json sample_to_json(const TextSample& sample);
TextSample sample_from_json(const json& j);

struct SplitResult {
    std::vector<TextSample> calibration;
    std::vector<TextSample> test;
};

// Label-stratified split, deterministic under (seed, fraction, ids).
// Raises ConfigError for fraction outside (0,1) and TooFewSamples when a
// present label class would end up empty on either side.
SplitResult split(const std::vector<TextSample>& samples, double calibration_fraction,
                  std::uint64_t seed);

// One question with a human and a machine answer. Flattened sample ids are
// "<pair_id>#human" and "<pair_id>#machine", which downstream evaluation
// recognizes for aligned pair statistics.
struct PairedSample {
    std::string pair_id;
    std::string question;
    TextSample human_answer;
    TextSample machine_answer;
};

// Paired corpus: two lines per pair, each with pair_id, question,
// role ("human" | "machine"), text, lang, source.
std::vector<PairedSample> load_paired(const std::filesystem::path& path);
void save_paired(const std::vector<PairedSample>& pairs, const std::filesystem::path& path);

std::vector<TextSample> flatten(const std::vector<PairedSample>& pairs);

// One Machine-labeled sample per question through a generation provider,
// cached like rewrites. Ids are "gen-<position>-<question digest prefix>";
// source records the provider id.
std::vector<TextSample> generate_machine_answers(const std::vector<std::string>& questions,
                                                 RewriteProvider& provider,
                                                 const GenParams& params = {},
                                                 CacheStore* cache = nullptr,
                                                 InflightLimiter* limiter = nullptr);

} // namespace vb
