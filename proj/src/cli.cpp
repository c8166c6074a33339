#include "varybalance/cli.hpp"

#include "varybalance/cache.hpp"
#include "varybalance/concurrency.hpp"
#include "varybalance/dataset.hpp"
#include "varybalance/detector.hpp"
#include "varybalance/errors.hpp"
#include "varybalance/evaluation.hpp"
#include "varybalance/fixture.hpp"
#include "varybalance/ngram.hpp"
#include "varybalance/rewriter.hpp"
#include "varybalance/scorer.hpp"
#include "varybalance/util.hpp"
#include "varybalance/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <optional>

namespace vb {

namespace fs = std::filesystem;

std::vector<VaryBalanceScore> detect_corpus(const std::vector<TextSample>& samples,
                                            const DetectorConfig& cfg,
                                            RewriteProvider& rewriter, ScorerProvider& scorer,
                                            CacheStore* cache, InflightLimiter* limiter,
                                            int max_inflight) {
    std::vector<VaryBalanceScore> results(samples.size());
    const unsigned workers =
        static_cast<unsigned>(std::clamp(max_inflight, 1, 32));
    parallel_for_indexed(samples.size(), workers, [&](std::size_t i) {
        results[i] = detect(samples[i], cfg, rewriter, scorer, cache, limiter);
    });
    return results;
}

std::vector<VaryBalanceScore> load_scores(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::IoError, "cannot read " + path.string());
    std::vector<VaryBalanceScore> scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        try {
            scores.push_back(VaryBalanceScore::from_json(json::parse(line)));
        } catch (const json::exception& e) {
            raise(ErrorKind::ParseError,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return scores;
}

namespace {

// Providers, cache, and limiter for one run, wired from the config.
struct Pipeline {
    std::unique_ptr<ScorerProvider> scorer;
    std::unique_ptr<RewriteProvider> rewriter;
    std::optional<CacheStore> cache;
    InflightLimiter limiter;

    explicit Pipeline(const RunConfig& cfg) : limiter(cfg.max_inflight) {
        scorer = make_scorer(cfg.scorer, cfg.base_dir);
        rewriter = make_rewriter(cfg.rewriter, cfg.seed, cfg.base_dir);
        if (!cfg.cache_dir.empty()) cache.emplace(fs::path(cfg.cache_dir));
    }

    CacheStore* cache_ptr() { return cache ? &*cache : nullptr; }
};

fs::path pick_run_dir(const std::optional<fs::path>& requested, const std::string& command,
                      const std::string& digest) {
    if (requested) return *requested;
    const fs::path base =
        fs::path("runs") / (utc_timestamp_compact() + "-" + command + "-" + digest);
    fs::path dir = base;
    for (int n = 2; fs::exists(dir); ++n) {
        dir = base;
        dir += "-" + std::to_string(n);
    }
    return dir;
}

std::string scores_to_jsonl(const std::vector<VaryBalanceScore>& scores) {
    std::string out;
    for (const VaryBalanceScore& s : scores) {
        out += s.to_json().dump();
        out += '\n';
    }
    return out;
}

json counters_json(const Pipeline& pipeline) {
    json j{{"scorer_calls", pipeline.scorer->call_count()},
           {"rewriter_calls", pipeline.rewriter->call_count()}};
    if (pipeline.cache) {
        const CacheCounters c = pipeline.cache->counters();
        j["cache"] = json{{"hits", c.hits}, {"misses", c.misses}, {"puts", c.puts}};
    } else {
        j["cache"] = nullptr;
    }
    return j;
}

json manifest_json(const std::string& command, const RunConfig& cfg, const Pipeline& pipeline,
                   const fs::path& input_path, const std::string& input_bytes,
                   std::size_t n_samples) {
    return json{{"tool_version", kToolVersion},
                {"created_utc", utc_timestamp_iso()},
                {"command", command},
                {"input",
                 json{{"path", input_path.string()},
                      {"sha256", sha256_hex(input_bytes)},
                      {"samples", n_samples}}},
                {"config", cfg.to_json()},
                {"providers",
                 json{{"scorer_id", pipeline.scorer->scorer_id()},
                      {"rewriter_id", pipeline.rewriter->rewriter_id()}}},
                {"counters", counters_json(pipeline)}};
}

std::string read_input_text(const std::string& text, const std::optional<fs::path>& file,
                            const char* command) {
    if (file) return read_file(*file);
    if (trim(text).empty()) {
        raise(ErrorKind::InvalidText,
              std::string(command) + " needs text (positional argument or --file)");
    }
    return text;
}

} // namespace

int cmd_detect(const DetectArgs& args, const RunConfig& cfg, std::ostream& out) {
    const std::string corpus_bytes = read_file(args.corpus);
    const std::vector<TextSample> samples = load_corpus(args.corpus);
    if (samples.empty()) raise(ErrorKind::EmptyCorpus, args.corpus.string() + " has no samples");

    Pipeline pipeline(cfg);
    const std::vector<VaryBalanceScore> scores =
        detect_corpus(samples, cfg.detector, *pipeline.rewriter, *pipeline.scorer,
                      pipeline.cache_ptr(), &pipeline.limiter, cfg.max_inflight);

    const fs::path dir = pick_run_dir(args.run_dir, "detect", cfg.digest());
    atomic_write_file(dir / "scores.jsonl", scores_to_jsonl(scores));
    atomic_write_file(dir / "manifest.json",
                      manifest_json("detect", cfg, pipeline, args.corpus, corpus_bytes,
                                    samples.size())
                              .dump(2) +
                          "\n");

    out << "scored " << scores.size() << " samples -> " << dir.string() << "\n";
    return 0;
}

int cmd_eval(const EvalArgs& args, std::ostream& out) {
    const std::string scores_bytes = read_file(args.scores);
    const std::vector<VaryBalanceScore> scores = load_scores(args.scores);

    std::unordered_map<std::string, Label> labels;
    for (const TextSample& s : load_corpus(args.labels)) labels[s.id()] = s.label();

    EvalConfig eval_cfg;
    eval_cfg.positive = label_from_string(args.positive);
    if (eval_cfg.positive == Label::Unknown) {
        raise(ErrorKind::ConfigError, "--positive must be human or machine");
    }
    if (args.score_field == "auto") eval_cfg.score_field = ScoreField::Auto;
    else if (args.score_field == "base") eval_cfg.score_field = ScoreField::Base;
    else if (args.score_field == "expansion") eval_cfg.score_field = ScoreField::Expansion;
    else raise(ErrorKind::ConfigError, "--score-field must be auto, base, or expansion");
    eval_cfg.threshold = args.threshold;

    const EvalReport report = evaluate(scores, labels, eval_cfg);

    const fs::path dir =
        pick_run_dir(args.run_dir, "eval", sha256_hex(scores_bytes).substr(0, 8));
    atomic_write_file(dir / "report.json", report.to_json().dump(2) + "\n");
    atomic_write_file(dir / "roc.csv", roc_csv(report.roc_points));
    atomic_write_file(dir / "hist.csv",
                      histogram_csv(report.human_stats, report.machine_stats));
    json manifest{{"tool_version", kToolVersion},
                  {"created_utc", utc_timestamp_iso()},
                  {"command", "eval"},
                  {"input",
                   json{{"scores", args.scores.string()},
                        {"scores_sha256", sha256_hex(scores_bytes)},
                        {"labels", args.labels.string()},
                        {"samples", scores.size()}}},
                  {"options",
                   json{{"positive", to_string(report.positive)},
                        {"score_field", to_string(report.score_field)},
                        {"threshold",
                         args.threshold ? json(*args.threshold) : json(nullptr)}}}};
    atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    out << "AUROC " << format_double(report.auroc) << " (positive: "
        << to_string(report.positive) << ", scores: " << to_string(report.score_field)
        << ")\n";
    out << "report -> " << dir.string() << "\n";
    return 0;
}

int cmd_study(const StudyArgs& args, const RunConfig& cfg, std::ostream& out) {
    const std::string paired_bytes = read_file(args.paired);
    const std::vector<PairedSample> pairs = load_paired(args.paired);
    if (pairs.empty()) raise(ErrorKind::EmptyCorpus, args.paired.string() + " has no pairs");
    const std::vector<TextSample> samples = flatten(pairs);

    Pipeline pipeline(cfg);
    const std::vector<VaryBalanceScore> scores =
        detect_corpus(samples, cfg.detector, *pipeline.rewriter, *pipeline.scorer,
                      pipeline.cache_ptr(), &pipeline.limiter, cfg.max_inflight);

    std::unordered_map<std::string, Label> labels;
    for (const TextSample& s : samples) labels[s.id()] = s.label();

    EvalConfig eval_cfg;
    const EvalReport report = evaluate(scores, labels, eval_cfg);

    EvalConfig base_cfg;
    base_cfg.score_field = ScoreField::Base;
    const double auroc_base = evaluate(scores, labels, base_cfg).auroc;

    json study{{"n_pairs", pairs.size()},
               {"variant", to_string(cfg.detector.variant)},
               {"msd_separation", report.msd_sep.to_json()},
               {"reference",
                json{{"mean_msd_human", 0.34},
                     {"mean_msd_machine", 0.009},
                     {"pair_fraction", 0.96}}},
               {"auroc", report.auroc},
               {"auroc_base", auroc_base},
               {"score_field", to_string(report.score_field)},
               {"report", report.to_json()}};

    const fs::path dir = pick_run_dir(args.run_dir, "study", cfg.digest());
    atomic_write_file(dir / "scores.jsonl", scores_to_jsonl(scores));
    atomic_write_file(dir / "study_report.json", study.dump(2) + "\n");
    atomic_write_file(dir / "roc.csv", roc_csv(report.roc_points));
    atomic_write_file(dir / "hist.csv",
                      histogram_csv(report.human_stats, report.machine_stats));
    atomic_write_file(dir / "manifest.json",
                      manifest_json("study", cfg, pipeline, args.paired, paired_bytes,
                                    samples.size())
                              .dump(2) +
                          "\n");

    const MsdSeparation& sep = report.msd_sep;
    out << "mean msd human " << format_double(sep.mean_human) << ", machine "
        << format_double(sep.mean_machine) << ", pair fraction "
        << format_double(sep.pair_fraction) << "\n";
    out << "AUROC " << format_double(report.auroc) << "\n";
    out << "report -> " << dir.string() << "\n";
    return 0;
}

int cmd_rewrite(const RewriteArgs& args, const RunConfig& cfg, std::ostream& out) {
    const std::string text = read_input_text(args.text, args.file, "rewrite");
    Pipeline pipeline(cfg);
    const TextSample sample("cli-text", text);
    const RewriteBundle bundle =
        rewrite_k(sample, cfg.detector.n_rewrites, *pipeline.rewriter, cfg.detector.prompt,
                  cfg.detector.params, pipeline.cache_ptr(), &pipeline.limiter);
    out << bundle.to_json().dump(2) << "\n";
    return 0;
}

int cmd_score(const ScoreArgs& args, const RunConfig& cfg, std::ostream& out) {
    const std::string text = read_input_text(args.text, args.file, "score");
    Pipeline pipeline(cfg);
    const TokenLogProbs tlp = score_tokens_cached(text, *pipeline.scorer,
                                                  pipeline.cache_ptr(), &pipeline.limiter,
                                                  cfg.detector.min_tokens);
    json j{{"scorer_id", tlp.scorer_id()},
           {"log_ppl", log_ppl(tlp, cfg.detector.min_tokens)},
           {"tokens_scored", tlp.size()},
           {"skipped_prefix", tlp.skipped_prefix()}};
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_cache_stats(const RunConfig& cfg, std::ostream& out) {
    if (cfg.cache_dir.empty()) {
        raise(ErrorKind::ConfigError, "no cache directory configured (--cache-dir)");
    }
    const fs::path root(cfg.cache_dir);
    const CacheCounters persisted = load_persisted_counters(root);
    CacheStore store(root);
    const CacheStore::DiskStats disk = store.scan();
    json j{{"root", root.string()},
           {"persisted",
            json{{"hits", persisted.hits},
                 {"misses", persisted.misses},
                 {"puts", persisted.puts}}},
           {"disk",
            json{{"rewrite_entries", disk.rewrite_entries},
                 {"score_entries", disk.score_entries},
                 {"total_bytes", disk.total_bytes},
                 {"quarantined", disk.quarantined}}}};
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_fit_ngram(const FitNgramArgs& args, std::ostream& out) {
    std::vector<std::string> texts;
    for (const TextSample& s : load_corpus(args.corpus)) texts.push_back(s.content());
    const NGramModel model = NGramModel::fit(texts, args.order, args.smoothing,
                                             tokenizer_mode_from_string(args.tokenizer));
    model.save(args.out_path);
    out << model.model_id() << " -> " << args.out_path.string() << "\n";
    return 0;
}

int cmd_fixture(const FixtureArgs& args, std::ostream& out) {
    FixtureOptions opts;
    opts.n_pairs = args.n_pairs;
    opts.seed = args.seed;
    write_fixture(args.dir, opts);
    out << "fixture with " << args.n_pairs << " pairs -> " << args.dir.string() << "\n";
    return 0;
}

} // namespace vb
