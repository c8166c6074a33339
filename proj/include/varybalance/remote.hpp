#pragma once

#include <cstddef>
#include <string>

#include "varybalance/rewriter.hpp"
#include "varybalance/scorer.hpp"

namespace vb {

// Shared settings for the OpenAI-compatible HTTP adapters. base_url is the
// API root including any path prefix (e.g. "http://localhost:8000/v1");
// endpoint paths are appended to it. The bearer token is read from the
// environment variable named by auth_env at request time; an empty name or
// unset variable sends no Authorization header.
struct RemoteHttpConfig {
    std::string base_url = "http://localhost:8000/v1";
    std::string model;
    std::string auth_env;
    double timeout_s = 60.0;
    int max_retries = 3;
    int backoff_base_ms = 250;
    std::size_t max_text_chars = 0; // 0 = unlimited
};

// Token logprobs via POST {base_url}/completions with echo, so the prompt
// itself is scored. Tokens the endpoint returns without a logprob (the
// leading token, typically) are reported through skipped_prefix.
class RemoteCompletionsScorer final : public ScorerProvider {
public:
    explicit RemoteCompletionsScorer(RemoteHttpConfig cfg);

    std::string scorer_id() const override { return "completions:" + cfg_.model; }
    TokenLogProbs score(const std::string& text) override;
    std::size_t max_text_chars() const override { return cfg_.max_text_chars; }

private:
    RemoteHttpConfig cfg_;
};

// Rewrites via POST {base_url}/chat/completions. The request is a single
// user message, instruction + blank line + text, with no system message.
// When params.seed is set, rewrite index i uses seed + i - 1 so the k
// draws differ but stay reproducible.
class RemoteChatRewriter final : public RewriteProvider {
public:
    explicit RemoteChatRewriter(RemoteHttpConfig cfg);

    std::string rewriter_id() const override { return "chat:" + cfg_.model; }
    GenParams default_params() const override { return {}; }
    std::string rewrite(const std::string& text, const std::string& instruction, int index,
                        const GenParams& params) override;

private:
    RemoteHttpConfig cfg_;
};

} // namespace vb
