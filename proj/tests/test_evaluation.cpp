#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "varybalance/evaluation.hpp"
#include "varybalance/util.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

using namespace vb;

namespace {

// All-pairs oracle: wins plus half-weighted ties.
double brute_force_auroc(const std::vector<double>& pos, const std::vector<double>& neg) {
    double score = 0.0;
    for (double p : pos) {
        for (double n : neg) {
            if (p > n) score += 1.0;
            else if (p == n) score += 0.5;
        }
    }
    return score / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double trapezoid_area(const std::vector<RocPoint>& points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        area += (points[i].fpr - points[i - 1].fpr) *
                (points[i].tpr + points[i - 1].tpr) / 2.0;
    }
    return area;
}

VaryBalanceScore score_record(const std::string& id, double score, double msd = 0.0,
                              std::optional<double> score_e = std::nullopt) {
    VaryBalanceScore s;
    s.sample_id = id;
    s.log_ppl_0 = score;
    s.rewrite_log_ppls = {score};
    s.msd = msd;
    s.score = score;
    s.score_e = score_e;
    s.variant = score_e ? Variant::Expansion : Variant::Base;
    return s;
}

} // namespace

TEST_CASE("auroc spans separation, inversion, and chance") {
    CHECK(auroc({2.0, 3.0}, {0.0, 1.0}) == 1.0);
    CHECK(auroc({0.0, 1.0}, {2.0, 3.0}) == 0.0);
    CHECK(auroc({1.0, 1.0}, {1.0, 1.0}) == 0.5);
    CHECK(auroc({1.0}, {0.0}) == 1.0);
}

TEST_CASE("auroc worked examples with a tie") {
    // one loss (1 vs 2), one tie (2 vs 2): (4 + 0.5)/6
    CHECK(auroc({3.0, 1.0, 2.0}, {2.0, 0.0}) == 0.75);
    CHECK(auroc({3.0, 1.0, 2.0}, {2.0, 0.0}) ==
          brute_force_auroc({3.0, 1.0, 2.0}, {2.0, 0.0}));
    // five wins, one tie: (5 + 0.5)/6
    CHECK(auroc({3.0, 1.0, 2.0}, {1.0, 0.0}) == 5.5 / 6.0);
    CHECK(auroc({3.0, 1.0, 2.0}, {1.0, 0.0}) ==
          brute_force_auroc({3.0, 1.0, 2.0}, {1.0, 0.0}));
}

TEST_CASE("auroc equals the all-pairs oracle on random tied data") {
    DetRng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t np = 1 + rng.next_below(40);
        const std::size_t nn = 1 + rng.next_below(40);
        std::vector<double> pos, neg;
        for (std::size_t i = 0; i < np; ++i)
            pos.push_back(static_cast<double>(rng.next_below(8)) / 2.0);
        for (std::size_t i = 0; i < nn; ++i)
            neg.push_back(static_cast<double>(rng.next_below(8)) / 2.0);

        CHECK(auroc(pos, neg) == brute_force_auroc(pos, neg));
        CHECK(auroc(pos, neg) + auroc(neg, pos) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("auroc is invariant under monotone score transforms") {
    DetRng rng(123);
    std::vector<double> pos, neg;
    for (int i = 0; i < 25; ++i) pos.push_back(rng.next_real(0.0, 4.0));
    for (int i = 0; i < 30; ++i) neg.push_back(rng.next_real(0.0, 4.0));
    const double before = auroc(pos, neg);
    auto warp = [](std::vector<double> v) {
        for (double& x : v) x = std::exp(x / 2.0) + 1.0;
        return v;
    };
    CHECK(auroc(warp(pos), warp(neg)) == before);
}

TEST_CASE("auroc rejects empty classes and non-finite scores") {
    CHECK(vbtest::catch_vb([] { auroc({}, {1.0}); })->kind() == ErrorKind::EmptyClass);
    CHECK(vbtest::catch_vb([] { auroc({1.0}, {}); })->kind() == ErrorKind::EmptyClass);
    CHECK(vbtest::catch_vb([] { auroc({std::nan("")}, {1.0}); })->kind() ==
          ErrorKind::NonFinite);
}

TEST_CASE("roc curves sweep thresholds from infinity down to all-positive") {
    const std::vector<double> pos{3.0, 1.0, 2.0};
    const std::vector<double> neg{2.0, 0.0};
    const std::vector<RocPoint> points = roc_curve(pos, neg);

    REQUIRE(points.size() == 5); // distinct scores {0,1,2,3} plus the opening point
    CHECK(points.front().threshold == std::numeric_limits<double>::infinity());
    CHECK(points.front().fpr == 0.0);
    CHECK(points.front().tpr == 0.0);
    CHECK(points.back().fpr == 1.0);
    CHECK(points.back().tpr == 1.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
        CHECK(points[i].threshold < points[i - 1].threshold);
        CHECK(points[i].fpr >= points[i - 1].fpr);
        CHECK(points[i].tpr >= points[i - 1].tpr);
    }
    CHECK(trapezoid_area(points) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("trapezoidal roc area reproduces auroc on random data") {
    DetRng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> pos, neg;
        const std::size_t np = 1 + rng.next_below(60);
        const std::size_t nn = 1 + rng.next_below(60);
        for (std::size_t i = 0; i < np; ++i)
            pos.push_back(static_cast<double>(rng.next_below(12)) / 3.0);
        for (std::size_t i = 0; i < nn; ++i)
            neg.push_back(static_cast<double>(rng.next_below(12)) / 3.0);
        const double area = trapezoid_area(roc_curve(pos, neg));
        CHECK(area == doctest::Approx(auroc(pos, neg)).epsilon(1e-9));
    }
}

TEST_CASE("csv renderings carry headers and one row per element") {
    const std::vector<RocPoint> points = roc_curve({2.0, 3.0}, {0.0, 1.0});
    const std::string csv = roc_csv(points);
    CHECK(csv.rfind("threshold,fpr,tpr\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == points.size() + 1);
}

TEST_CASE("effective_score selects the requested field") {
    const VaryBalanceScore base = score_record("a", 2.0);
    CHECK(effective_score(base, ScoreField::Base) == 2.0);
    CHECK(vbtest::catch_vb([&] { effective_score(base, ScoreField::Expansion); })->kind() ==
          ErrorKind::ConfigError);

    const VaryBalanceScore both = score_record("b", 2.0, 0.0, 5.0);
    CHECK(effective_score(both, ScoreField::Base) == 2.0);
    CHECK(effective_score(both, ScoreField::Expansion) == 5.0);
}

TEST_CASE("evaluate joins labels, resolves auto, and reports both classes") {
    std::vector<VaryBalanceScore> scores;
    std::unordered_map<std::string, Label> labels;
    for (int i = 0; i < 10; ++i) {
        const std::string hid = "h" + std::to_string(i);
        const std::string mid = "m" + std::to_string(i);
        scores.push_back(score_record(hid, 4.0 + i * 0.1, 0.3, 8.0 + i * 0.1));
        scores.push_back(score_record(mid, 2.0 + i * 0.1, 0.01, 1.0 + i * 0.1));
        labels[hid] = Label::Human;
        labels[mid] = Label::Machine;
    }

    const EvalReport report = evaluate(scores, labels);
    CHECK(report.auroc == 1.0);
    CHECK(report.score_field == ScoreField::Expansion); // auto picks expansion when present
    CHECK(report.positive == Label::Human);
    CHECK(report.human_stats.count == 10);
    CHECK(report.machine_stats.count == 10);
    CHECK(report.human_stats.mean == doctest::Approx(8.45));
    CHECK(report.msd_sep.mean_human == doctest::Approx(0.3));
    CHECK(report.msd_sep.mean_machine == doctest::Approx(0.01));
    CHECK(report.msd_sep.pair_fraction == 1.0);
    CHECK(!report.accuracy_at_threshold.has_value());
    CHECK(trapezoid_area(report.roc_points) == doctest::Approx(report.auroc).epsilon(1e-9));

    // shared histogram range across classes, counts match class sizes
    CHECK(report.human_stats.histogram.lo == report.machine_stats.histogram.lo);
    CHECK(report.human_stats.histogram.hi == report.machine_stats.histogram.hi);
    std::uint64_t human_total = 0;
    for (auto c : report.human_stats.histogram.counts) human_total += c;
    CHECK(human_total == 10);

    EvalConfig flipped;
    flipped.positive = Label::Machine;
    CHECK(evaluate(scores, labels, flipped).auroc == doctest::Approx(0.0));

    EvalConfig with_threshold;
    with_threshold.threshold = 5.0;
    const EvalReport thr = evaluate(scores, labels, with_threshold);
    REQUIRE(thr.accuracy_at_threshold.has_value());
    CHECK(*thr.accuracy_at_threshold == 1.0);

    EvalConfig base_field;
    base_field.score_field = ScoreField::Base;
    CHECK(evaluate(scores, labels, base_field).score_field == ScoreField::Base);
}

TEST_CASE("evaluate falls back to base when any record lacks score_e") {
    std::vector<VaryBalanceScore> scores{score_record("h0", 4.0, 0.0, 9.0),
                                         score_record("m0", 1.0)};
    std::unordered_map<std::string, Label> labels{{"h0", Label::Human},
                                                  {"m0", Label::Machine}};
    CHECK(evaluate(scores, labels).score_field == ScoreField::Base);
}

TEST_CASE("evaluate names unlabeled samples and rejects single-class input") {
    std::vector<VaryBalanceScore> scores{score_record("known", 1.0),
                                         score_record("mystery-id", 2.0)};
    std::unordered_map<std::string, Label> labels{{"known", Label::Human}};
    auto err = vbtest::catch_vb([&] { evaluate(scores, labels); });
    REQUIRE(err);
    CHECK(err->kind() == ErrorKind::UnlabeledSample);
    CHECK(vbtest::contains(err->what(), "mystery-id"));

    labels["mystery-id"] = Label::Human;
    CHECK(vbtest::catch_vb([&] { evaluate(scores, labels); })->kind() ==
          ErrorKind::EmptyClass);
}

TEST_CASE("msd separation compares aligned pairs when ids pair up") {
    std::vector<VaryBalanceScore> humans{score_record("p1#human", 1.0, 1.0),
                                         score_record("p2#human", 1.0, 0.5)};
    std::vector<VaryBalanceScore> machines{score_record("p1#machine", 1.0, 0.4),
                                           score_record("p2#machine", 1.0, 0.6)};
    const MsdSeparation aligned = msd_separation(humans, machines);
    CHECK(aligned.aligned_pairs);
    CHECK(aligned.pair_fraction == 0.5); // p1 wins, p2 loses
    CHECK(aligned.mean_human == doctest::Approx(0.75));
    CHECK(aligned.mean_machine == doctest::Approx(0.5));

    // generic ids: all cross pairs
    std::vector<VaryBalanceScore> h2{score_record("a", 1.0, 1.0),
                                     score_record("b", 1.0, 0.5)};
    std::vector<VaryBalanceScore> m2{score_record("c", 1.0, 0.4),
                                     score_record("d", 1.0, 0.6)};
    const MsdSeparation cross = msd_separation(h2, m2);
    CHECK(!cross.aligned_pairs);
    CHECK(cross.pair_fraction == 0.75);

    CHECK(vbtest::catch_vb([&] { msd_separation({}, m2); })->kind() ==
          ErrorKind::EmptyClass);
}

TEST_CASE("threshold calibration maximizes balanced accuracy, ties to the smallest") {
    std::vector<VaryBalanceScore> scores{
        score_record("h1", 5.0), score_record("h2", 6.0),
        score_record("m1", 1.0), score_record("m2", 2.0)};
    std::unordered_map<std::string, Label> labels{{"h1", Label::Human},
                                                  {"h2", Label::Human},
                                                  {"m1", Label::Machine},
                                                  {"m2", Label::Machine}};
    CHECK(calibrate_threshold(scores, labels) == 5.0);

    // inverted data: nothing beats chance, the smallest candidate wins
    std::vector<VaryBalanceScore> inverted{score_record("h1", 1.0),
                                           score_record("m1", 5.0)};
    std::unordered_map<std::string, Label> inv_labels{{"h1", Label::Human},
                                                      {"m1", Label::Machine}};
    CHECK(calibrate_threshold(inverted, inv_labels) == 1.0);
}
