#include "varybalance/cli.hpp"
#include "varybalance/errors.hpp"
#include "varybalance/version.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonFlags {
    std::optional<std::string> config;
    vb::ConfigOverrides overrides;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config, "JSON config file");
    cmd->add_option("--scorer", flags.overrides.scorer,
                    "scorer: ngram[:<model path>] | completions:<model>");
    cmd->add_option("--rewriter", flags.overrides.rewriter,
                    "rewriter: mock[:<seed>] | identity | chat:<model>");
    cmd->add_option("--k", flags.overrides.k, "rewrites per sample");
    cmd->add_option("--variant", flags.overrides.variant, "score variant")
        ->check(CLI::IsMember({"base", "expansion"}));
    cmd->add_option("--rho-cap", flags.overrides.rho_cap, "expansion coefficient cap");
    cmd->add_option("--seed", flags.overrides.seed, "run seed (mocks, splits)");
    cmd->add_option("--cache-dir", flags.overrides.cache_dir, "provider output cache");
    cmd->add_option("--max-inflight", flags.overrides.max_inflight,
                    "global bound on concurrent provider calls");
    cmd->add_option("--threshold", flags.overrides.threshold, "classification threshold");
}

vb::RunConfig resolve(const CommonFlags& flags) {
    std::optional<std::filesystem::path> path;
    if (flags.config) path = *flags.config;
    return vb::resolve_config(path, flags.overrides);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"VaryBalance: score texts by how far LLM rewrites move their "
                 "log-perplexity; higher scores indicate human origin"};
    app.set_version_flag("--version", vb::kToolVersion);
    app.require_subcommand(1);

    int exit_code = 0;

    auto* detect = app.add_subcommand("detect", "score every sample in a corpus");
    CommonFlags detect_flags;
    vb::DetectArgs detect_args;
    detect->add_option("corpus", detect_args.corpus, "corpus .jsonl")->required();
    detect->add_option("--run-dir", detect_args.run_dir, "output directory");
    add_common(detect, detect_flags);
    detect->callback(
        [&] { exit_code = vb::cmd_detect(detect_args, resolve(detect_flags), std::cout); });

    auto* eval = app.add_subcommand("eval", "evaluate detection scores against labels");
    vb::EvalArgs eval_args;
    eval->add_option("scores", eval_args.scores, "scores .jsonl from detect/study")->required();
    eval->add_option("--labels", eval_args.labels, "corpus .jsonl carrying labels")->required();
    eval->add_option("--positive", eval_args.positive, "positive class")
        ->check(CLI::IsMember({"human", "machine"}));
    eval->add_option("--score-field", eval_args.score_field, "which score to rank by")
        ->check(CLI::IsMember({"auto", "base", "expansion"}));
    eval->add_option("--threshold", eval_args.threshold,
                     "also report accuracy at this threshold");
    eval->add_option("--run-dir", eval_args.run_dir, "output directory");
    eval->callback([&] { exit_code = vb::cmd_eval(eval_args, std::cout); });

    auto* study = app.add_subcommand(
        "study", "rewrite-deviation separation statistics on a paired corpus");
    CommonFlags study_flags;
    vb::StudyArgs study_args;
    study->add_option("paired", study_args.paired, "paired corpus .jsonl")->required();
    study->add_option("--run-dir", study_args.run_dir, "output directory");
    add_common(study, study_flags);
    study->callback(
        [&] { exit_code = vb::cmd_study(study_args, resolve(study_flags), std::cout); });

    auto* rewrite = app.add_subcommand("rewrite", "print k rewrites of one text");
    CommonFlags rewrite_flags;
    vb::RewriteArgs rewrite_args;
    rewrite->add_option("text", rewrite_args.text, "text to rewrite");
    rewrite->add_option("--file", rewrite_args.file, "read the text from a file");
    add_common(rewrite, rewrite_flags);
    rewrite->callback(
        [&] { exit_code = vb::cmd_rewrite(rewrite_args, resolve(rewrite_flags), std::cout); });

    auto* score = app.add_subcommand("score", "print the log-perplexity of one text");
    CommonFlags score_flags;
    vb::ScoreArgs score_args;
    score->add_option("text", score_args.text, "text to score");
    score->add_option("--file", score_args.file, "read the text from a file");
    add_common(score, score_flags);
    score->callback(
        [&] { exit_code = vb::cmd_score(score_args, resolve(score_flags), std::cout); });

    auto* cache = app.add_subcommand("cache", "cache maintenance");
    cache->require_subcommand(1);
    auto* cache_stats = cache->add_subcommand("stats", "print cache counters and disk usage");
    CommonFlags cache_flags;
    add_common(cache_stats, cache_flags);
    cache_stats->callback(
        [&] { exit_code = vb::cmd_cache_stats(resolve(cache_flags), std::cout); });

    auto* fit = app.add_subcommand("fit-ngram", "fit an n-gram scorer model on a corpus");
    vb::FitNgramArgs fit_args;
    fit->add_option("corpus", fit_args.corpus, "training corpus .jsonl")->required();
    fit->add_option("--out", fit_args.out_path, "model output path")->required();
    fit->add_option("--order", fit_args.order, "n-gram order (1..3)");
    fit->add_option("--smoothing", fit_args.smoothing, "add-k smoothing constant");
    fit->add_option("--tokenizer", fit_args.tokenizer, "whitespace | character")
        ->check(CLI::IsMember({"whitespace", "character"}));
    fit->callback([&] { exit_code = vb::cmd_fit_ngram(fit_args, std::cout); });

    auto* fixture = app.add_subcommand("fixture", "generate the synthetic benchmark corpus");
    vb::FixtureArgs fixture_args;
    fixture->add_option("--dir", fixture_args.dir, "output directory")->required();
    fixture->add_option("--pairs", fixture_args.n_pairs, "number of human/machine pairs");
    fixture->add_option("--seed", fixture_args.seed, "generation seed");
    fixture->callback([&] { exit_code = vb::cmd_fixture(fixture_args, std::cout); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const vb::VbError& e) {
        std::cerr << "vb: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "vb: internal error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
