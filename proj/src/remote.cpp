#include "varybalance/remote.hpp"

#include "varybalance/errors.hpp"
#include "varybalance/util.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

namespace vb {

namespace {

struct ParsedUrl {
    std::string origin;      // scheme://host[:port]
    std::string path_prefix; // no trailing slash
};

ParsedUrl parse_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        raise(ErrorKind::ConfigError,
              "base_url must carry a scheme (http:// or https://), got `" + base_url + "`");
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    ParsedUrl url;
    if (path_start == std::string::npos) {
        url.origin = base_url;
    } else {
        url.origin = base_url.substr(0, path_start);
        url.path_prefix = base_url.substr(path_start);
        while (!url.path_prefix.empty() && url.path_prefix.back() == '/') {
            url.path_prefix.pop_back();
        }
    }
    return url;
}

httplib::Headers auth_headers(const std::string& auth_env) {
    httplib::Headers headers;
    if (!auth_env.empty()) {
        if (const char* token = std::getenv(auth_env.c_str()); token != nullptr && *token) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }
    return headers;
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

json post_json(const RemoteHttpConfig& cfg, const std::string& endpoint, const json& body) {
    const ParsedUrl url = parse_base_url(cfg.base_url);
    const std::string path = url.path_prefix + endpoint;
    const std::string payload = body.dump();
    const int attempts = 1 + std::max(0, cfg.max_retries);
    std::string last_error;

    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) {
            const int shift = std::min(attempt - 2, 4);
            const int delay = std::min(cfg.backoff_base_ms << shift, 4000);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }

        httplib::Client client(url.origin);
        const auto sec = static_cast<time_t>(cfg.timeout_s);
        const auto usec = static_cast<time_t>((cfg.timeout_s - static_cast<double>(sec)) * 1e6);
        client.set_connection_timeout(sec, usec);
        client.set_read_timeout(sec, usec);
        client.set_write_timeout(sec, usec);

        auto res = client.Post(path, auth_headers(cfg.auth_env), payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            try {
                return json::parse(res->body);
            } catch (const json::exception& e) {
                raise(ErrorKind::ProviderError,
                      path + " returned unparseable JSON: " + e.what());
            }
        }
        last_error = "HTTP " + std::to_string(res->status);
        if (!res->body.empty()) {
            last_error += " " + res->body.substr(0, 200);
        }
        if (!retryable_status(res->status)) {
            raise(ErrorKind::ProviderError,
                  path + " failed on attempt " + std::to_string(attempt) + ": " + last_error);
        }
    }
    raise(ErrorKind::ProviderError, path + " failed after " + std::to_string(attempts) +
                                        " attempts; last: " + last_error);
}

} // namespace

RemoteCompletionsScorer::RemoteCompletionsScorer(RemoteHttpConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.model.empty()) raise(ErrorKind::ConfigError, "remote scorer needs a model name");
    parse_base_url(cfg_.base_url);
}

TokenLogProbs RemoteCompletionsScorer::score(const std::string& text) {
    if (trim(text).empty()) raise(ErrorKind::InvalidText, "cannot score blank text");
    if (cfg_.max_text_chars > 0 && text.size() > cfg_.max_text_chars) {
        raise(ErrorKind::ProviderError,
              "text of " + std::to_string(text.size()) + " chars exceeds the provider limit of " +
                  std::to_string(cfg_.max_text_chars));
    }
    record_call();

    const json body{{"model", cfg_.model}, {"prompt", text},   {"max_tokens", 0},
                    {"echo", true},        {"logprobs", 0}};
    const json res = post_json(cfg_, "/completions", body);

    try {
        const json& lp = res.at("choices").at(0).at("logprobs");
        const json& toks = lp.at("tokens");
        const json& probs = lp.at("token_logprobs");
        if (!toks.is_array() || !probs.is_array() || toks.size() != probs.size()) {
            raise(ErrorKind::ProviderError,
                  "completions response tokens/token_logprobs are misaligned");
        }
        std::vector<std::string> tokens;
        std::vector<double> values;
        tokens.reserve(toks.size());
        values.reserve(probs.size());
        int skipped = 0;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            if (probs[i].is_null()) {
                ++skipped;
                continue;
            }
            double v = probs[i].get<double>();
            if (v > 0.0) {
                // Some servers emit tiny positive values from float noise.
                if (v <= 1e-6) v = 0.0;
                else {
                    raise(ErrorKind::ProviderError,
                          "logprob " + format_double(v) + " for token " + std::to_string(i) +
                              " is positive");
                }
            }
            tokens.push_back(toks[i].get<std::string>());
            values.push_back(v);
        }
        return TokenLogProbs(scorer_id(), std::move(tokens), std::move(values), skipped);
    } catch (const json::exception& e) {
        raise(ErrorKind::ProviderError,
              std::string("malformed completions response: ") + e.what());
    }
}

RemoteChatRewriter::RemoteChatRewriter(RemoteHttpConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.model.empty()) raise(ErrorKind::ConfigError, "remote rewriter needs a model name");
    parse_base_url(cfg_.base_url);
}

std::string RemoteChatRewriter::rewrite(const std::string& text, const std::string& instruction,
                                        int index, const GenParams& params) {
    if (trim(text).empty()) raise(ErrorKind::InvalidText, "cannot rewrite blank text");
    record_call();

    const std::string content = instruction.empty() ? text : instruction + "\n\n" + text;
    json body{{"model", cfg_.model},
              {"messages", json::array({json{{"role", "user"}, {"content", content}}})},
              {"temperature", params.temperature},
              {"max_tokens", params.max_tokens}};
    if (params.seed) {
        body["seed"] = *params.seed + (index >= 1 ? index - 1 : 0);
    }
    const json res = post_json(cfg_, "/chat/completions", body);

    try {
        return res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        raise(ErrorKind::ProviderError, std::string("malformed chat response: ") + e.what());
    }
}

} // namespace vb
