#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "varybalance/config.hpp"
#include "varybalance/types.hpp"

namespace vb {

class CacheStore;
class InflightLimiter;
class RewriteProvider;
class ScorerProvider;

// Detection across a corpus, parallel over samples, deterministic output
// order (results land at their sample's position).
std::vector<VaryBalanceScore> detect_corpus(const std::vector<TextSample>& samples,
                                            const DetectorConfig& cfg,
                                            RewriteProvider& rewriter, ScorerProvider& scorer,
                                            CacheStore* cache, InflightLimiter* limiter,
                                            int max_inflight);

// scores.jsonl round trip: one record per line.
std::vector<VaryBalanceScore> load_scores(const std::filesystem::path& path);

// Command implementations behind the `vb` binary. Each writes its files
// into a run directory (default runs/<timestamp>-<digest>, override via
// run_dir), prints a short summary to `out`, and returns the process exit
// code. All outputs are written atomically after the work succeeded, so a
// failing run leaves no partial files.

struct DetectArgs {
    std::filesystem::path corpus;
    std::optional<std::filesystem::path> run_dir;
};
int cmd_detect(const DetectArgs& args, const RunConfig& cfg, std::ostream& out);

struct EvalArgs {
    std::filesystem::path scores;
    std::filesystem::path labels; // corpus whose label field joins on sample id
    std::optional<std::filesystem::path> run_dir;
    std::string positive = "human";
    std::string score_field = "auto";
    std::optional<double> threshold;
};
int cmd_eval(const EvalArgs& args, std::ostream& out);

struct StudyArgs {
    std::filesystem::path paired;
    std::optional<std::filesystem::path> run_dir;
};
int cmd_study(const StudyArgs& args, const RunConfig& cfg, std::ostream& out);

struct RewriteArgs {
    std::string text;
    std::optional<std::filesystem::path> file; // wins over text when set
};
int cmd_rewrite(const RewriteArgs& args, const RunConfig& cfg, std::ostream& out);

struct ScoreArgs {
    std::string text;
    std::optional<std::filesystem::path> file;
};
int cmd_score(const ScoreArgs& args, const RunConfig& cfg, std::ostream& out);

int cmd_cache_stats(const RunConfig& cfg, std::ostream& out);

struct FitNgramArgs {
    std::filesystem::path corpus;
    std::filesystem::path out_path;
    int order = 1;
    double smoothing = 1.0;
    std::string tokenizer = "whitespace";
};
int cmd_fit_ngram(const FitNgramArgs& args, std::ostream& out);

struct FixtureArgs {
    std::filesystem::path dir;
    int n_pairs = 400;
    std::uint64_t seed = 7;
};
int cmd_fixture(const FixtureArgs& args, std::ostream& out);

} // namespace vb
