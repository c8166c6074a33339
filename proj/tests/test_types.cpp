#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "varybalance/types.hpp"
#include "varybalance/util.hpp"

#include <cmath>
#include <string>

using namespace vb;

TEST_CASE("labels round-trip their names") {
    CHECK(label_from_string("human") == Label::Human);
    CHECK(label_from_string("machine") == Label::Machine);
    CHECK(label_from_string("unknown") == Label::Unknown);
    CHECK(label_from_string("") == Label::Unknown);
    CHECK(std::string(to_string(Label::Human)) == "human");
    CHECK(std::string(to_string(Label::Machine)) == "machine");
    CHECK(std::string(to_string(Label::Unknown)) == "unknown");

    auto err = vbtest::catch_vb([] { label_from_string("alien"); });
    REQUIRE(err);
    CHECK(err->kind() == ErrorKind::ParseError);
    CHECK(vbtest::contains(err->what(), "alien"));
}

TEST_CASE("variants round-trip their names") {
    CHECK(variant_from_string("base") == Variant::Base);
    CHECK(variant_from_string("expansion") == Variant::Expansion);
    CHECK(std::string(to_string(Variant::Base)) == "base");
    CHECK(std::string(to_string(Variant::Expansion)) == "expansion");

    auto err = vbtest::catch_vb([] { variant_from_string("extended"); });
    REQUIRE(err);
    CHECK(err->kind() == ErrorKind::ParseError);
}

TEST_CASE("text sample carries a content digest and digest-based equality") {
    const TextSample a("s1", "hello world", Label::Human, "en", "unit");
    CHECK(a.content_digest() == sha256_hex("hello world"));
    CHECK(a.content_digest().size() == 64);

    const TextSample same("s1", "hello world");
    const TextSample other_text("s1", "hello there");
    const TextSample other_id("s2", "hello world");
    CHECK(a == same); // label and metadata are provenance, not identity
    CHECK(a != other_text);
    CHECK(a != other_id);
    CHECK(TextSample("x", "y").label() == Label::Unknown);
}

TEST_CASE("gen params serialize with and without a seed") {
    GenParams p;
    p.temperature = 0.7;
    p.max_tokens = 256;
    CHECK(gen_params_from_json(gen_params_to_json(p)) == p);
    CHECK(gen_params_to_json(p).at("seed").is_null());

    p.seed = -3;
    CHECK(gen_params_from_json(gen_params_to_json(p)) == p);
    CHECK(gen_params_to_json(p).at("seed").get<std::int64_t>() == -3);
}

TEST_CASE("rewrite bundles round-trip through json") {
    GenParams p;
    p.seed = 11;
    const RewriteBundle bundle("sample-9", "mock-s7", kDefaultRewritePrompt, p,
                               {{1, "one"}, {2, "two"}, {3, "three"}});
    CHECK(bundle.k() == 3);
    const RewriteBundle back = RewriteBundle::from_json(bundle.to_json());
    CHECK(back == bundle);
    CHECK(back.prompt() == "Revise this text.");
}

TEST_CASE("token logprobs round-trip and reject misaligned arrays") {
    const TokenLogProbs tlp("ngram-x", {"a", "b"}, {-0.5, -1.0}, 1);
    const TokenLogProbs back = TokenLogProbs::from_json(tlp.to_json());
    CHECK(back == tlp);
    CHECK(back.size() == 2);
    CHECK(back.skipped_prefix() == 1);

    auto err = vbtest::catch_vb(
        [] { TokenLogProbs("id", {"a", "b"}, {-0.5}, 0); });
    REQUIRE(err);
    CHECK(err->kind() == ErrorKind::ProviderError);
}

TEST_CASE("score records round-trip, optionals included") {
    VaryBalanceScore s;
    s.sample_id = "s1";
    s.log_ppl_0 = 3.25;
    s.rewrite_log_ppls = {3.0, 3.5, 2.75};
    s.msd = 0.1;
    s.sign = 1;
    s.score = 3.59;
    s.variant = Variant::Base;
    CHECK(VaryBalanceScore::from_json(s.to_json()) == s);
    CHECK(s.to_json().at("rho").is_null());
    CHECK(s.to_json().at("score_e").is_null());

    s.rho = 2.5;
    s.score_e = 4.1;
    s.variant = Variant::Expansion;
    CHECK(VaryBalanceScore::from_json(s.to_json()) == s);
    CHECK(s.to_json().at("variant") == "expansion");
}

TEST_CASE("detector config rejects out-of-range knobs") {
    DetectorConfig ok;
    ok.validate();

    auto check_rejects = [](auto mutate) {
        DetectorConfig cfg;
        mutate(cfg);
        auto err = vbtest::catch_vb([&] { cfg.validate(); });
        REQUIRE(err);
        CHECK(err->kind() == ErrorKind::ConfigError);
    };
    check_rejects([](DetectorConfig& c) { c.n_rewrites = 0; });
    check_rejects([](DetectorConfig& c) { c.rho_cap = 0.0; });
    check_rejects([](DetectorConfig& c) { c.rho_cap = -1.0; });
    check_rejects([](DetectorConfig& c) { c.min_tokens = 0; });
    check_rejects([](DetectorConfig& c) {
        c.variant = Variant::Expansion;
        c.n_rewrites = 1;
    });
    check_rejects([](DetectorConfig& c) { c.threshold = std::nan(""); });
    check_rejects([](DetectorConfig& c) { c.params.temperature = -0.5; });
}
