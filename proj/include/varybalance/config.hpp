#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "varybalance/types.hpp"

namespace vb {

class RewriteProvider;
class ScorerProvider;

// Scorer selection. kind "ngram" loads model_path when it exists,
// otherwise fits on train_corpus with (order, smoothing, tokenizer);
// kind "completions" talks to a remote endpoint. Relative paths resolve
// against the directory the config file came from.
struct ScorerSettings {
    std::string kind = "ngram";

    std::string model_path;
    std::string train_corpus;
    int order = 1;
    double smoothing = 1.0;
    std::string tokenizer = "whitespace";

    std::string base_url = "http://localhost:8000/v1";
    std::string model;
    std::string auth_env = "VB_SCORER_API_KEY";
    double timeout_s = 60.0;
    int max_retries = 3;

    json to_json() const;
    static ScorerSettings from_json(const json& j);
};

// Rewriter selection: "mock" (optionally with a synonyms table file),
// "identity", or remote "chat".
struct RewriterSettings {
    std::string kind = "mock";

    std::optional<std::uint64_t> seed; // defaults to the run seed
    std::string synonyms_path;

    std::string base_url = "http://localhost:8000/v1";
    std::string model;
    std::string auth_env = "VB_REWRITER_API_KEY";
    double timeout_s = 120.0;
    int max_retries = 3;

    json to_json() const;
    static RewriterSettings from_json(const json& j);
};

// Everything one run needs. The detector field carries the score math
// knobs; seed drives mocks and splits; cache_dir empty means no cache.
struct RunConfig {
    DetectorConfig detector;
    ScorerSettings scorer;
    RewriterSettings rewriter;
    std::string cache_dir;
    std::uint64_t seed = 0;
    int max_inflight = 8;
    // Directory relative paths in the settings resolve against (set from
    // the config file location; "." otherwise). Not serialized.
    std::filesystem::path base_dir = ".";

    void validate() const;
    json to_json() const;
    static RunConfig from_json(const json& j);

    // Digest of the effective config, used in run directory names.
    std::string digest() const;
};

// Command-line values that outrank both environment and file settings.
struct ConfigOverrides {
    std::optional<std::string> scorer;   // "ngram" | "ngram:<path>" | "completions:<model>"
    std::optional<std::string> rewriter; // "mock" | "mock:<seed>" | "identity" | "chat:<model>"
    std::optional<std::string> cache_dir;
    std::optional<std::string> variant;  // "base" | "expansion"
    std::optional<int> k;
    std::optional<double> rho_cap;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_inflight;
    std::optional<double> threshold;
};

// Assembles the effective config: defaults, then the config file (when
// given), then VB_* environment variables, then explicit flag overrides.
RunConfig resolve_config(const std::optional<std::filesystem::path>& config_path,
                         const ConfigOverrides& overrides);

// Provider factories over the resolved settings.
std::unique_ptr<ScorerProvider> make_scorer(const ScorerSettings& settings,
                                            const std::filesystem::path& base_dir);
std::unique_ptr<RewriteProvider> make_rewriter(const RewriterSettings& settings,
                                               std::uint64_t run_seed,
                                               const std::filesystem::path& base_dir);

} // namespace vb
