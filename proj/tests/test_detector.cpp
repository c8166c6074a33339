#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "varybalance/cache.hpp"
#include "varybalance/detector.hpp"
#include "varybalance/ngram.hpp"
#include "varybalance/rewriter.hpp"
#include "varybalance/util.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace vb;

namespace {

// Straight-line re-derivations, kept deliberately separate from the
// library's implementations.
double oracle_msd(double lp0, const std::vector<double>& rw) {
    double sum = 0.0;
    for (double v : rw) sum += (v - lp0) * (v - lp0);
    return sum / static_cast<double>(rw.size());
}

int oracle_sign(double lp0, const std::vector<double>& rw) {
    double mean = 0.0;
    for (double v : rw) mean += v;
    mean /= static_cast<double>(rw.size());
    if (lp0 > mean) return 1;
    if (lp0 < mean) return -1;
    return 0;
}

double oracle_base(double lp0, const std::vector<double>& rw) {
    return std::exp(oracle_sign(lp0, rw) * oracle_msd(lp0, rw)) * lp0;
}

NGramScorerProvider make_scorer_provider() {
    return NGramScorerProvider(NGramModel::fit(
        {"the big old house sat near the river and the garden kept growing "
         "while people said it was very quiet so nobody wanted to buy it",
         "a large home stood by the water and everyone stayed away"},
        1, 1.0, TokenizerMode::Whitespace));
}

const char* kText =
    "The big old house sat near the river. People said it was very quiet. "
    "Nobody wanted to buy it. The garden kept growing anyway.";

} // namespace

TEST_CASE("the worked example fixes msd, sign, base, and rho") {
    const std::vector<double> rw{2.0, 2.5};
    CHECK(msd(3.0, rw) == 0.625);
    CHECK(sign_term(3.0, rw) == 1);
    const double base = base_score(3.0, rw);
    CHECK(base == doctest::Approx(std::exp(0.625) * 3.0).epsilon(1e-15));
    CHECK(base == doctest::Approx(5.60474).epsilon(1e-4));

    const ExpansionResult e = expansion_score(3.0, rw, 1000.0);
    CHECK(e.rho == 10.0); // msd 0.625 over rewrite variance 0.0625
    CHECK(e.score_e == doctest::Approx(std::exp(6.25) * 3.0).epsilon(1e-15));
    CHECK(e.score_e == doctest::Approx(1554.0384740675807).epsilon(1e-9));
}

TEST_CASE("sign covers above, below, and exact tie") {
    CHECK(sign_term(3.0, {2.0, 2.5}) == 1);
    CHECK(sign_term(1.0, {2.0, 3.0}) == -1);
    CHECK(sign_term(2.0, {2.0}) == 0);
    CHECK(sign_term(2.5, {2.0, 3.0}) == 0);
}

TEST_CASE("rho clamps to the cap and zero variance maps to the cap") {
    const ExpansionResult clamped = expansion_score(3.0, {2.0, 2.5}, 5.0);
    CHECK(clamped.rho == 5.0);
    CHECK(clamped.score_e == doctest::Approx(std::exp(5.0 * 0.625) * 3.0).epsilon(1e-15));

    const ExpansionResult zero_var = expansion_score(3.0, {2.0, 2.0}, 50.0);
    CHECK(zero_var.rho == 50.0);
    CHECK(zero_var.score_e == doctest::Approx(std::exp(50.0) * 3.0).epsilon(1e-12));
}

TEST_CASE("rho of one makes expansion equal base") {
    // rewrites symmetric around lp0: msd == variance and sign == 0
    const std::vector<double> rw{2.0, 4.0};
    const ExpansionResult e = expansion_score(3.0, rw, 1000.0);
    CHECK(e.rho == 1.0);
    CHECK(e.score_e == base_score(3.0, rw));
    CHECK(e.score_e == 3.0);
}

TEST_CASE("degenerate and invalid inputs raise typed errors") {
    auto empty = vbtest::catch_vb([] { msd(1.0, {}); });
    REQUIRE(empty);
    CHECK(empty->kind() == ErrorKind::EmptyRewrites);

    auto few = vbtest::catch_vb([] { expansion_score(1.0, {2.0}, 10.0); });
    REQUIRE(few);
    CHECK(few->kind() == ErrorKind::TooFewRewrites);

    const double nan = std::nan("");
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(vbtest::catch_vb([&] { msd(nan, {1.0}); })->kind() == ErrorKind::NonFinite);
    CHECK(vbtest::catch_vb([&] { msd(1.0, {inf}); })->kind() == ErrorKind::NonFinite);
    CHECK(vbtest::catch_vb([&] { sign_term(nan, {1.0}); })->kind() == ErrorKind::NonFinite);

    // msd so large the exponential overflows (rewrites below, so sign is +1)
    auto overflow = vbtest::catch_vb([] { base_score(1000.0, {1.0, 2.0}); });
    REQUIRE(overflow);
    CHECK(overflow->kind() == ErrorKind::NonFinite);
    CHECK(vbtest::contains(overflow->what(), "rho_cap"));
}

TEST_CASE("scores match the straight-line oracle on random inputs") {
    DetRng rng(2024);
    for (int i = 0; i < 2000; ++i) {
        const double lp0 = rng.next_real(0.1, 8.0);
        const int k = 2 + static_cast<int>(rng.next_below(6));
        std::vector<double> rw;
        for (int j = 0; j < k; ++j) rw.push_back(lp0 + rng.next_real(-1.5, 1.5));

        CHECK(msd(lp0, rw) == doctest::Approx(oracle_msd(lp0, rw)).epsilon(1e-12));
        CHECK(sign_term(lp0, rw) == oracle_sign(lp0, rw));
        CHECK(base_score(lp0, rw) == doctest::Approx(oracle_base(lp0, rw)).epsilon(1e-12));

        const ExpansionResult e = expansion_score(lp0, rw, 30.0);
        CHECK(e.rho >= 0.0);
        CHECK(e.rho <= 30.0);
        CHECK(std::isfinite(e.score_e));
    }
}

TEST_CASE("classify splits on the threshold inclusively") {
    CHECK(classify(2.0, 2.0) == Label::Human);
    CHECK(classify(2.1, 2.0) == Label::Human);
    CHECK(classify(1.9, 2.0) == Label::Machine);
}

TEST_CASE("identity rewrites pin msd to zero and score to the original log-ppl") {
    NGramScorerProvider scorer = make_scorer_provider();
    IdentityRewriteProvider identity;

    DetectorConfig cfg;
    cfg.n_rewrites = 3;
    cfg.min_tokens = 2;

    const TextSample sample("s1", kText);
    const VaryBalanceScore base = detect(sample, cfg, identity, scorer);
    CHECK(base.msd == 0.0);
    CHECK(base.sign == 0);
    CHECK(base.score == base.log_ppl_0);
    CHECK(!base.rho.has_value());
    CHECK(!base.score_e.has_value());

    cfg.variant = Variant::Expansion;
    const VaryBalanceScore exp = detect(sample, cfg, identity, scorer);
    CHECK(exp.score_e.has_value());
    CHECK(*exp.score_e == exp.log_ppl_0); // sign 0 kills the cap-sized rho
    CHECK(*exp.rho == cfg.rho_cap);
}

TEST_CASE("detect records every intermediate and reuses the cache") {
    vbtest::TempDir tmp;
    CacheStore cache(tmp / "cache");
    NGramScorerProvider scorer = make_scorer_provider();
    MockRewriteProvider rewriter(7);

    DetectorConfig cfg;
    cfg.n_rewrites = 3;
    cfg.variant = Variant::Expansion;
    cfg.min_tokens = 2;

    const TextSample sample("s1", kText);
    const VaryBalanceScore first = detect(sample, cfg, rewriter, scorer, &cache);
    CHECK(first.sample_id == "s1");
    CHECK(first.rewrite_log_ppls.size() == 3);
    CHECK(first.log_ppl_0 > 0.0);
    CHECK(first.variant == Variant::Expansion);
    REQUIRE(first.score_e.has_value());
    CHECK(std::isfinite(*first.score_e));
    CHECK(first.msd == doctest::Approx(oracle_msd(first.log_ppl_0,
                                                  first.rewrite_log_ppls))
                           .epsilon(1e-12));
    const auto rewrites = rewriter.call_count();
    const auto scores = scorer.call_count();
    CHECK(rewrites == 3);
    CHECK(scores == 4);

    const VaryBalanceScore second = detect(sample, cfg, rewriter, scorer, &cache);
    CHECK(second == first);
    CHECK(rewriter.call_count() == rewrites);
    CHECK(scorer.call_count() == scores);
}

TEST_CASE("detect annotates failures with sample id and stage") {
    NGramScorerProvider scorer = make_scorer_provider();
    MockRewriteProvider rewriter(7);

    DetectorConfig cfg;
    cfg.min_tokens = 8;

    auto err = vbtest::catch_vb(
        [&] { detect(TextSample("tiny-sample", "it was"), cfg, rewriter, scorer); });
    REQUIRE(err);
    CHECK(err->kind() == ErrorKind::TooShort);
    CHECK(vbtest::contains(err->what(), "tiny-sample"));
    CHECK(vbtest::contains(err->what(), "score"));
}
