#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "varybalance/cache.hpp"
#include "varybalance/dataset.hpp"
#include "varybalance/rewriter.hpp"
#include "varybalance/util.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

using namespace vb;

namespace {

std::vector<TextSample> mixed_corpus(int humans, int machines) {
    std::vector<TextSample> out;
    for (int i = 0; i < humans; ++i) {
        out.emplace_back("h" + std::to_string(i), "human text " + std::to_string(i),
                         Label::Human, "en", "unit");
    }
    for (int i = 0; i < machines; ++i) {
        out.emplace_back("m" + std::to_string(i), "machine text " + std::to_string(i),
                         Label::Machine, "en", "unit");
    }
    return out;
}

} // namespace

TEST_CASE("corpus files round-trip all fields") {
    vbtest::TempDir tmp;
    const auto path = tmp / "corpus.jsonl";
    std::vector<TextSample> samples = mixed_corpus(2, 2);
    samples.emplace_back("u0", "unlabeled text", Label::Unknown, "de", "web");
    save_corpus(samples, path);

    const std::vector<TextSample> back = load_corpus(path);
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(back[i] == samples[i]);
        CHECK(back[i].label() == samples[i].label());
        CHECK(back[i].lang() == samples[i].lang());
        CHECK(back[i].source() == samples[i].source());
    }
}

TEST_CASE("corpus loading skips blank lines and tolerates CRLF") {
    vbtest::TempDir tmp;
    const auto path = tmp / "corpus.jsonl";
    atomic_write_file(
        path,
        "\n{\"id\":\"a\",\"text\":\"first\",\"label\":\"human\",\"lang\":\"en\",\"source\":\"x\"}\r\n"
        "\n{\"id\":\"b\",\"text\":\"second\",\"label\":null,\"lang\":\"\",\"source\":\"\"}\n\n");
    const std::vector<TextSample> samples = load_corpus(path);
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].id() == "a");
    CHECK(samples[0].content() == "first");
    CHECK(samples[1].label() == Label::Unknown);
}

TEST_CASE("corpus parse failures name the file and line") {
    vbtest::TempDir tmp;
    const auto path = tmp / "bad.jsonl";

    auto expect_parse_error = [&](const std::string& content, const std::string& needle) {
        atomic_write_file(path, content);
        auto err = vbtest::catch_vb([&] { load_corpus(path); });
        REQUIRE(err);
        CHECK(err->kind() == ErrorKind::ParseError);
        CHECK(vbtest::contains(err->what(), "bad.jsonl:" + needle));
    };

    const std::string good =
        "{\"id\":\"a\",\"text\":\"t\",\"label\":null,\"lang\":\"\",\"source\":\"\"}\n";
    const std::string good2 =
        "{\"id\":\"a2\",\"text\":\"t\",\"label\":null,\"lang\":\"\",\"source\":\"\"}\n";
    expect_parse_error(good + good2 + "{oops\n", "3");
    expect_parse_error(good + "{\"id\":\"b\",\"label\":null,\"lang\":\"\",\"source\":\"\"}\n",
                       "2");
    expect_parse_error(good + "{\"id\":7,\"text\":\"t\",\"label\":null}\n", "2");
    expect_parse_error(
        good + "{\"id\":\"b\",\"text\":\"t\",\"label\":\"robot\",\"lang\":\"\",\"source\":\"\"}\n",
        "2");

    atomic_write_file(path, good + good);
    auto dup = vbtest::catch_vb([&] { load_corpus(path); });
    REQUIRE(dup);
    CHECK(dup->kind() == ErrorKind::DuplicateId);
}

TEST_CASE("splits are stratified, exhaustive, and deterministic") {
    const std::vector<TextSample> samples = mixed_corpus(60, 40);
    const SplitResult split1 = split(samples, 0.2, 1);
    CHECK(split1.calibration.size() == 20);
    CHECK(split1.test.size() == 80);

    auto count_label = [](const std::vector<TextSample>& v, Label want) {
        return std::count_if(v.begin(), v.end(),
                             [&](const TextSample& s) { return s.label() == want; });
    };
    CHECK(count_label(split1.calibration, Label::Human) == 12);
    CHECK(count_label(split1.calibration, Label::Machine) == 8);

    std::set<std::string> seen;
    for (const auto& s : split1.calibration) seen.insert(s.id());
    for (const auto& s : split1.test) CHECK(!seen.count(s.id()));
    for (const auto& s : split1.test) seen.insert(s.id());
    CHECK(seen.size() == samples.size());

    const SplitResult split2 = split(samples, 0.2, 1);
    REQUIRE(split2.calibration.size() == split1.calibration.size());
    for (std::size_t i = 0; i < split1.calibration.size(); ++i) {
        CHECK(split2.calibration[i] == split1.calibration[i]);
    }

    const SplitResult other_seed = split(samples, 0.2, 2);
    bool any_difference = false;
    for (std::size_t i = 0; i < split1.calibration.size(); ++i) {
        any_difference |= !(other_seed.calibration[i] == split1.calibration[i]);
    }
    CHECK(any_difference);

    auto ids_sorted = [](const std::vector<TextSample>& v) {
        return std::is_sorted(v.begin(), v.end(), [](const auto& a, const auto& b) {
            return a.id() < b.id();
        });
    };
    CHECK(ids_sorted(split1.calibration));
    CHECK(ids_sorted(split1.test));
}

TEST_CASE("splits reject bad fractions and classes too small to split") {
    const std::vector<TextSample> samples = mixed_corpus(4, 4);
    CHECK(vbtest::catch_vb([&] { split(samples, 0.0, 1); })->kind() ==
          ErrorKind::ConfigError);
    CHECK(vbtest::catch_vb([&] { split(samples, 1.0, 1); })->kind() ==
          ErrorKind::ConfigError);

    const std::vector<TextSample> lone = mixed_corpus(1, 4);
    CHECK(vbtest::catch_vb([&] { split(lone, 0.5, 1); })->kind() ==
          ErrorKind::TooFewSamples);
}

TEST_CASE("paired corpora round-trip and flatten with role-suffixed ids") {
    vbtest::TempDir tmp;
    const auto path = tmp / "paired.jsonl";
    std::vector<PairedSample> pairs;
    for (int i = 0; i < 3; ++i) {
        const std::string pid = "p" + std::to_string(i);
        pairs.push_back(PairedSample{
            pid, "question " + std::to_string(i),
            TextSample(pid + "#human", "human answer " + std::to_string(i), Label::Human,
                       "en", "unit"),
            TextSample(pid + "#machine", "machine answer " + std::to_string(i),
                       Label::Machine, "en", "unit")});
    }
    save_paired(pairs, path);
    const std::vector<PairedSample> back = load_paired(path);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].pair_id == pairs[i].pair_id);
        CHECK(back[i].question == pairs[i].question);
        CHECK(back[i].human_answer == pairs[i].human_answer);
        CHECK(back[i].machine_answer == pairs[i].machine_answer);
        CHECK(back[i].human_answer.label() == Label::Human);
        CHECK(back[i].machine_answer.label() == Label::Machine);
    }

    const std::vector<TextSample> flat = flatten(back);
    REQUIRE(flat.size() == 6);
    CHECK(flat[0].id() == "p0#human");
    CHECK(flat[1].id() == "p0#machine");
    CHECK(flat[4].id() == "p2#human");
}

TEST_CASE("paired corpora reject structural defects with line numbers") {
    vbtest::TempDir tmp;
    const auto path = tmp / "paired.jsonl";
    const std::string human_line =
        "{\"pair_id\":\"p1\",\"question\":\"q\",\"role\":\"human\",\"text\":\"h\","
        "\"lang\":\"\",\"source\":\"\"}\n";
    const std::string machine_line =
        "{\"pair_id\":\"p1\",\"question\":\"q\",\"role\":\"machine\",\"text\":\"m\","
        "\"lang\":\"\",\"source\":\"\"}\n";

    atomic_write_file(path, human_line);
    auto missing = vbtest::catch_vb([&] { load_paired(path); });
    REQUIRE(missing);
    CHECK(missing->kind() == ErrorKind::ParseError);
    CHECK(vbtest::contains(missing->what(), "p1"));

    atomic_write_file(path, human_line + human_line);
    CHECK(vbtest::catch_vb([&] { load_paired(path); })->kind() == ErrorKind::DuplicateId);

    atomic_write_file(
        path,
        human_line +
            "{\"pair_id\":\"p1\",\"question\":\"other\",\"role\":\"machine\","
            "\"text\":\"m\",\"lang\":\"\",\"source\":\"\"}\n");
    auto mismatch = vbtest::catch_vb([&] { load_paired(path); });
    REQUIRE(mismatch);
    CHECK(mismatch->kind() == ErrorKind::ParseError);
    CHECK(vbtest::contains(mismatch->what(), "question"));

    atomic_write_file(
        path, human_line +
                  "{\"pair_id\":\"p1\",\"question\":\"q\",\"role\":\"referee\","
                  "\"text\":\"m\",\"lang\":\"\",\"source\":\"\"}\n");
    auto role = vbtest::catch_vb([&] { load_paired(path); });
    REQUIRE(role);
    CHECK(role->kind() == ErrorKind::ParseError);
    CHECK(vbtest::contains(role->what(), ":2"));

    atomic_write_file(
        path, human_line +
                  "{\"pair_id\":\"p1\",\"question\":\"q\",\"role\":\"machine\","
                  "\"text\":\"  \",\"lang\":\"\",\"source\":\"\"}\n");
    CHECK(vbtest::catch_vb([&] { load_paired(path); })->kind() == ErrorKind::ParseError);
}

TEST_CASE("machine answers come from the provider, cached and labeled") {
    vbtest::TempDir tmp;
    CacheStore cache(tmp / "cache");
    MockRewriteProvider provider(11);
    const std::vector<std::string> questions{
        "Why is the big house near the fast river so very quiet. Nobody knows.",
        "How do people keep such a big garden so very tidy. They begin early."};

    const std::vector<TextSample> cold =
        generate_machine_answers(questions, provider, {}, &cache);
    REQUIRE(cold.size() == 2);
    CHECK(provider.call_count() == 2);
    for (std::size_t i = 0; i < cold.size(); ++i) {
        CHECK(cold[i].label() == Label::Machine);
        CHECK(cold[i].source() == provider.rewriter_id());
        CHECK(vbtest::contains(cold[i].id(), "gen-" + std::to_string(i) + "-"));
        CHECK(!cold[i].content().empty());
        CHECK(cold[i].content() != questions[i]);
    }

    const std::vector<TextSample> warm =
        generate_machine_answers(questions, provider, {}, &cache);
    CHECK(provider.call_count() == 2);
    REQUIRE(warm.size() == cold.size());
    for (std::size_t i = 0; i < warm.size(); ++i) CHECK(warm[i] == cold[i]);

    CHECK(vbtest::catch_vb([&] { generate_machine_answers({}, provider); })->kind() ==
          ErrorKind::EmptyCorpus);
    CHECK(vbtest::catch_vb([&] {
              generate_machine_answers({"ok question with big fast words", "  "}, provider);
          })->kind() == ErrorKind::InvalidText);
}
