#include "varybalance/config.hpp"

#include "varybalance/dataset.hpp"
#include "varybalance/errors.hpp"
#include "varybalance/ngram.hpp"
#include "varybalance/remote.hpp"
#include "varybalance/rewriter.hpp"
#include "varybalance/util.hpp"

#include <json.hpp>

#include <cstdlib>

namespace vb {

namespace {

std::optional<std::string> env_value(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const std::uint64_t value = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        raise(ErrorKind::ConfigError, what + " must be an unsigned integer, got `" + text + "`");
    }
}

int parse_int(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const int value = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        raise(ErrorKind::ConfigError, what + " must be an integer, got `" + text + "`");
    }
}

double parse_real(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        raise(ErrorKind::ConfigError, what + " must be a number, got `" + text + "`");
    }
}

// variant_from_string raises ParseError; at the settings layer a bad value
// is a configuration mistake.
Variant parse_variant_setting(const std::string& value, const std::string& what) {
    try {
        return variant_from_string(value);
    } catch (const VbError&) {
        raise(ErrorKind::ConfigError,
              what + " must be base or expansion, got `" + value + "`");
    }
}

// "ngram", "ngram:<model path>", "completions:<model>"
void apply_scorer_spec(ScorerSettings& settings, const std::string& spec,
                       const std::string& origin) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "ngram") {
        settings.kind = "ngram";
        if (!arg.empty()) {
            settings.model_path = arg;
            settings.train_corpus.clear();
        }
    } else if (kind == "completions") {
        settings.kind = "completions";
        if (arg.empty()) {
            raise(ErrorKind::ConfigError, origin + ": completions scorer needs a model name "
                                                   "(`completions:<model>`)");
        }
        settings.model = arg;
    } else {
        raise(ErrorKind::ConfigError,
              origin + ": unknown scorer `" + spec +
                  "`; expected ngram[:<model path>] or completions:<model>");
    }
}

// "mock", "mock:<seed>", "identity", "chat:<model>"
void apply_rewriter_spec(RewriterSettings& settings, const std::string& spec,
                         const std::string& origin) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "mock") {
        settings.kind = "mock";
        if (!arg.empty()) settings.seed = parse_u64(arg, origin + ": mock seed");
    } else if (kind == "identity") {
        settings.kind = "identity";
    } else if (kind == "chat") {
        settings.kind = "chat";
        if (arg.empty()) {
            raise(ErrorKind::ConfigError,
                  origin + ": chat rewriter needs a model name (`chat:<model>`)");
        }
        settings.model = arg;
    } else {
        raise(ErrorKind::ConfigError,
              origin + ": unknown rewriter `" + spec +
                  "`; expected mock[:<seed>], identity, or chat:<model>");
    }
}

} // namespace

json ScorerSettings::to_json() const {
    return json{{"kind", kind},
                {"model_path", model_path},
                {"train_corpus", train_corpus},
                {"order", order},
                {"smoothing", smoothing},
                {"tokenizer", tokenizer},
                {"base_url", base_url},
                {"model", model},
                {"auth_env", auth_env},
                {"timeout_s", timeout_s},
                {"max_retries", max_retries}};
}

ScorerSettings ScorerSettings::from_json(const json& j) {
    ScorerSettings s;
    s.kind = j.value("kind", s.kind);
    s.model_path = j.value("model_path", s.model_path);
    s.train_corpus = j.value("train_corpus", s.train_corpus);
    s.order = j.value("order", s.order);
    s.smoothing = j.value("smoothing", s.smoothing);
    s.tokenizer = j.value("tokenizer", s.tokenizer);
    s.base_url = j.value("base_url", s.base_url);
    s.model = j.value("model", s.model);
    s.auth_env = j.value("auth_env", s.auth_env);
    s.timeout_s = j.value("timeout_s", s.timeout_s);
    s.max_retries = j.value("max_retries", s.max_retries);
    return s;
}

json RewriterSettings::to_json() const {
    json j{{"kind", kind},
           {"synonyms_path", synonyms_path},
           {"base_url", base_url},
           {"model", model},
           {"auth_env", auth_env},
           {"timeout_s", timeout_s},
           {"max_retries", max_retries}};
    if (seed) j["seed"] = *seed;
    else j["seed"] = nullptr;
    return j;
}

RewriterSettings RewriterSettings::from_json(const json& j) {
    RewriterSettings s;
    s.kind = j.value("kind", s.kind);
    if (j.contains("seed") && !j["seed"].is_null()) s.seed = j["seed"].get<std::uint64_t>();
    s.synonyms_path = j.value("synonyms_path", s.synonyms_path);
    s.base_url = j.value("base_url", s.base_url);
    s.model = j.value("model", s.model);
    s.auth_env = j.value("auth_env", s.auth_env);
    s.timeout_s = j.value("timeout_s", s.timeout_s);
    s.max_retries = j.value("max_retries", s.max_retries);
    return s;
}

void RunConfig::validate() const {
    detector.validate();
    if (scorer.kind != "ngram" && scorer.kind != "completions") {
        raise(ErrorKind::ConfigError, "unknown scorer kind `" + scorer.kind + "`");
    }
    if (rewriter.kind != "mock" && rewriter.kind != "identity" && rewriter.kind != "chat") {
        raise(ErrorKind::ConfigError, "unknown rewriter kind `" + rewriter.kind + "`");
    }
    if (max_inflight < 1) {
        raise(ErrorKind::ConfigError,
              "max_inflight must be >= 1, got " + std::to_string(max_inflight));
    }
}

json RunConfig::to_json() const {
    json j{{"k", detector.n_rewrites},
           {"variant", to_string(detector.variant)},
           {"rho_cap", detector.rho_cap},
           {"min_tokens", detector.min_tokens},
           {"prompt", detector.prompt},
           {"params", gen_params_to_json(detector.params)},
           {"seed", seed},
           {"max_inflight", max_inflight},
           {"cache_dir", cache_dir},
           {"scorer", scorer.to_json()},
           {"rewriter", rewriter.to_json()}};
    if (detector.threshold) j["threshold"] = *detector.threshold;
    else j["threshold"] = nullptr;
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    cfg.detector.n_rewrites = j.value("k", cfg.detector.n_rewrites);
    if (j.contains("variant")) {
        cfg.detector.variant = parse_variant_setting(j["variant"].get<std::string>(), "variant");
    }
    cfg.detector.rho_cap = j.value("rho_cap", cfg.detector.rho_cap);
    cfg.detector.min_tokens = j.value("min_tokens", cfg.detector.min_tokens);
    if (j.contains("threshold") && !j["threshold"].is_null()) {
        cfg.detector.threshold = j["threshold"].get<double>();
    }
    cfg.detector.prompt = j.value("prompt", cfg.detector.prompt);
    if (j.contains("params")) cfg.detector.params = gen_params_from_json(j["params"]);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.max_inflight = j.value("max_inflight", cfg.max_inflight);
    if (j.contains("cache_dir") && !j["cache_dir"].is_null()) {
        cfg.cache_dir = j["cache_dir"].get<std::string>();
    }
    if (j.contains("scorer")) cfg.scorer = ScorerSettings::from_json(j["scorer"]);
    if (j.contains("rewriter")) cfg.rewriter = RewriterSettings::from_json(j["rewriter"]);
    return cfg;
}

std::string RunConfig::digest() const { return sha256_hex(to_json().dump()).substr(0, 8); }

RunConfig resolve_config(const std::optional<std::filesystem::path>& config_path,
                         const ConfigOverrides& overrides) {
    RunConfig cfg;
    if (config_path) {
        json j;
        try {
            j = json::parse(read_file(*config_path));
        } catch (const json::exception& e) {
            raise(ErrorKind::ParseError, config_path->string() + ": " + e.what());
        }
        try {
            cfg = RunConfig::from_json(j);
        } catch (const json::exception& e) {
            raise(ErrorKind::ConfigError, config_path->string() + ": " + e.what());
        }
        cfg.base_dir = config_path->parent_path().empty() ? std::filesystem::path(".")
                                                          : config_path->parent_path();
    }

    if (auto v = env_value("VB_SCORER")) apply_scorer_spec(cfg.scorer, *v, "VB_SCORER");
    if (auto v = env_value("VB_REWRITER")) apply_rewriter_spec(cfg.rewriter, *v, "VB_REWRITER");
    if (auto v = env_value("VB_CACHE_DIR")) cfg.cache_dir = *v;
    if (auto v = env_value("VB_K")) cfg.detector.n_rewrites = parse_int(*v, "VB_K");
    if (auto v = env_value("VB_VARIANT")) cfg.detector.variant = parse_variant_setting(*v, "VB_VARIANT");
    if (auto v = env_value("VB_RHO_CAP")) cfg.detector.rho_cap = parse_real(*v, "VB_RHO_CAP");
    if (auto v = env_value("VB_SEED")) cfg.seed = parse_u64(*v, "VB_SEED");
    if (auto v = env_value("VB_MAX_INFLIGHT")) {
        cfg.max_inflight = parse_int(*v, "VB_MAX_INFLIGHT");
    }

    if (overrides.scorer) apply_scorer_spec(cfg.scorer, *overrides.scorer, "--scorer");
    if (overrides.rewriter) {
        apply_rewriter_spec(cfg.rewriter, *overrides.rewriter, "--rewriter");
    }
    if (overrides.cache_dir) cfg.cache_dir = *overrides.cache_dir;
    if (overrides.variant) cfg.detector.variant = parse_variant_setting(*overrides.variant, "--variant");
    if (overrides.k) cfg.detector.n_rewrites = *overrides.k;
    if (overrides.rho_cap) cfg.detector.rho_cap = *overrides.rho_cap;
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.max_inflight) cfg.max_inflight = *overrides.max_inflight;
    if (overrides.threshold) cfg.detector.threshold = *overrides.threshold;

    cfg.validate();
    return cfg;
}

std::unique_ptr<ScorerProvider> make_scorer(const ScorerSettings& settings,
                                            const std::filesystem::path& base_dir) {
    if (settings.kind == "completions") {
        RemoteHttpConfig http;
        http.base_url = settings.base_url;
        http.model = settings.model;
        http.auth_env = settings.auth_env;
        http.timeout_s = settings.timeout_s;
        http.max_retries = settings.max_retries;
        return std::make_unique<RemoteCompletionsScorer>(std::move(http));
    }
    if (settings.kind != "ngram") {
        raise(ErrorKind::ConfigError, "unknown scorer kind `" + settings.kind + "`");
    }

    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    if (!settings.model_path.empty()) {
        const auto path = resolve(settings.model_path);
        if (std::filesystem::exists(path)) {
            return std::make_unique<NGramScorerProvider>(NGramModel::load(path));
        }
        if (settings.train_corpus.empty()) {
            raise(ErrorKind::IoError, "scorer model file " + path.string() + " does not exist");
        }
    }
    if (settings.train_corpus.empty()) {
        raise(ErrorKind::ConfigError,
              "ngram scorer needs either model_path or train_corpus");
    }
    std::vector<std::string> texts;
    for (const TextSample& s : load_corpus(resolve(settings.train_corpus))) {
        texts.push_back(s.content());
    }
    NGramModel model = NGramModel::fit(texts, settings.order, settings.smoothing,
                                       tokenizer_mode_from_string(settings.tokenizer));
    return std::make_unique<NGramScorerProvider>(std::move(model));
}

std::unique_ptr<RewriteProvider> make_rewriter(const RewriterSettings& settings,
                                               std::uint64_t run_seed,
                                               const std::filesystem::path& base_dir) {
    if (settings.kind == "identity") return std::make_unique<IdentityRewriteProvider>();
    if (settings.kind == "chat") {
        RemoteHttpConfig http;
        http.base_url = settings.base_url;
        http.model = settings.model;
        http.auth_env = settings.auth_env;
        http.timeout_s = settings.timeout_s;
        http.max_retries = settings.max_retries;
        return std::make_unique<RemoteChatRewriter>(std::move(http));
    }
    if (settings.kind != "mock") {
        raise(ErrorKind::ConfigError, "unknown rewriter kind `" + settings.kind + "`");
    }

    const std::uint64_t seed = settings.seed.value_or(run_seed);
    if (settings.synonyms_path.empty()) {
        return std::make_unique<MockRewriteProvider>(seed);
    }
    std::filesystem::path path(settings.synonyms_path);
    if (!path.is_absolute()) path = base_dir / path;
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        raise(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
    if (!j.is_object()) {
        raise(ErrorKind::ParseError, path.string() + ": synonyms must be a flat object");
    }
    SynonymTable table;
    for (const auto& [word, replacement] : j.items()) {
        if (!replacement.is_string()) {
            raise(ErrorKind::ParseError,
                  path.string() + ": replacement for `" + word + "` must be a string");
        }
        table[word] = replacement.get<std::string>();
    }
    return std::make_unique<MockRewriteProvider>(seed, std::move(table));
}

} // namespace vb
