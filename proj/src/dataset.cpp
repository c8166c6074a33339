#include "varybalance/dataset.hpp"

#include "varybalance/cache.hpp"
#include "varybalance/concurrency.hpp"
#include "varybalance/errors.hpp"
#include "varybalance/rewriter.hpp"
#include "varybalance/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace vb {

namespace {

json parse_line(const std::string& line, const std::filesystem::path& path,
                std::size_t line_no) {
    try {
        json j = json::parse(line);
        if (!j.is_object()) {
            raise(ErrorKind::ParseError,
                  path.string() + ":" + std::to_string(line_no) + ": record is not an object");
        }
        return j;
    } catch (const json::exception& e) {
        raise(ErrorKind::ParseError,
              path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
}

std::string require_string(const json& j, const char* field, const std::filesystem::path& path,
                           std::size_t line_no) {
    if (!j.contains(field) || !j[field].is_string()) {
        raise(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) +
                                         ": missing or non-string `" + field + "` field");
    }
    return j[field].get<std::string>();
}

std::string optional_string(const json& j, const char* field) {
    if (!j.contains(field) || j[field].is_null()) return "";
    return j[field].is_string() ? j[field].get<std::string>() : "";
}

// Iterates non-blank lines of a line-record file.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::IoError, "cannot read " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        fn(line, line_no);
    }
}

} // namespace

json sample_to_json(const TextSample& sample) {
    json j{{"id", sample.id()},
           {"text", sample.content()},
           {"lang", sample.lang()},
           {"source", sample.source()}};
    if (sample.label() == Label::Unknown) j["label"] = nullptr;
    else j["label"] = to_string(sample.label());
    return j;
}

TextSample sample_from_json(const json& j) {
    Label label = Label::Unknown;
    if (j.contains("label") && j["label"].is_string()) {
        label = label_from_string(j["label"].get<std::string>());
    }
    return TextSample(j.at("id").get<std::string>(), j.at("text").get<std::string>(), label,
                      optional_string(j, "lang"), optional_string(j, "source"));
}

std::vector<TextSample> load_corpus(const std::filesystem::path& path) {
    std::vector<TextSample> samples;
    std::set<std::string> ids;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        json j = parse_line(line, path, line_no);
        const std::string id = require_string(j, "id", path, line_no);
        const std::string text = require_string(j, "text", path, line_no);
        Label label = Label::Unknown;
        if (j.contains("label") && !j["label"].is_null()) {
            if (!j["label"].is_string()) {
                raise(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) +
                                                 ": `label` must be a string or null");
            }
            try {
                label = label_from_string(j["label"].get<std::string>());
            } catch (const VbError& e) {
                raise(ErrorKind::ParseError,
                      path.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        if (!ids.insert(id).second) {
            raise(ErrorKind::DuplicateId, path.string() + ":" + std::to_string(line_no) +
                                              ": duplicate sample id `" + id + "`");
        }
        samples.emplace_back(id, text, label, optional_string(j, "lang"),
                             optional_string(j, "source"));
    });
    return samples;
}

void save_corpus(const std::vector<TextSample>& samples, const std::filesystem::path& path) {
    std::string out;
    for (const TextSample& s : samples) {
        out += sample_to_json(s).dump();
        out += '\n';
    }
    atomic_write_file(path, out);
}

SplitResult split(const std::vector<TextSample>& samples, double calibration_fraction,
                  std::uint64_t seed) {
    if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0)) {
        raise(ErrorKind::ConfigError, "calibration fraction must lie strictly inside (0,1)");
    }

    std::map<Label, std::vector<const TextSample*>> by_label;
    for (const TextSample& s : samples) by_label[s.label()].push_back(&s);

    SplitResult result;
    for (auto& [label, group] : by_label) {
        std::sort(group.begin(), group.end(),
                  [](const TextSample* a, const TextSample* b) { return a->id() < b->id(); });
        std::uint64_t state = seed;
        splitmix64(state);
        DetRng rng(state ^ fnv1a64(to_string(label)));
        rng.shuffle(group);

        const auto n_cal = static_cast<std::size_t>(
            std::llround(calibration_fraction * static_cast<double>(group.size())));
        if (n_cal == 0 || n_cal == group.size()) {
            raise(ErrorKind::TooFewSamples,
                  std::string("label `") + to_string(label) + "` has " +
                      std::to_string(group.size()) +
                      " samples; both split sides need at least one");
        }
        for (std::size_t i = 0; i < group.size(); ++i) {
            (i < n_cal ? result.calibration : result.test).push_back(*group[i]);
        }
    }
    auto by_id = [](const TextSample& a, const TextSample& b) { return a.id() < b.id(); };
    std::sort(result.calibration.begin(), result.calibration.end(), by_id);
    std::sort(result.test.begin(), result.test.end(), by_id);
    return result;
}

std::vector<PairedSample> load_paired(const std::filesystem::path& path) {
    struct Half {
        std::string question;
        std::string text;
        std::string lang;
        std::string source;
        std::size_t line_no = 0;
        bool present = false;
    };
    struct Entry {
        std::string pair_id;
        Half human;
        Half machine;
    };
    std::vector<Entry> entries;
    std::map<std::string, std::size_t> index_of;

    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        json j = parse_line(line, path, line_no);
        const std::string pair_id = require_string(j, "pair_id", path, line_no);
        const std::string question = require_string(j, "question", path, line_no);
        const std::string role = require_string(j, "role", path, line_no);
        const std::string text = require_string(j, "text", path, line_no);
        if (role != "human" && role != "machine") {
            raise(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) +
                                             ": role must be `human` or `machine`, got `" +
                                             role + "`");
        }
        if (trim(text).empty()) {
            raise(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) +
                                             ": pair `" + pair_id + "` has a blank text");
        }

        auto [it, inserted] = index_of.try_emplace(pair_id, entries.size());
        if (inserted) entries.push_back(Entry{pair_id, {}, {}});
        Entry& entry = entries[it->second];
        Half& half = role == "human" ? entry.human : entry.machine;
        if (half.present) {
            raise(ErrorKind::DuplicateId, path.string() + ":" + std::to_string(line_no) +
                                              ": pair `" + pair_id + "` already has a " + role +
                                              " answer");
        }
        half = Half{question, text, optional_string(j, "lang"), optional_string(j, "source"),
                    line_no, true};
    });

    std::vector<PairedSample> pairs;
    pairs.reserve(entries.size());
    for (const Entry& entry : entries) {
        for (const auto* half : {&entry.human, &entry.machine}) {
            if (!half->present) {
                raise(ErrorKind::ParseError,
                      path.string() + ": pair `" + entry.pair_id + "` is missing its " +
                          (half == &entry.human ? "human" : "machine") + " answer");
            }
        }
        if (entry.human.question != entry.machine.question) {
            raise(ErrorKind::ParseError, path.string() + ": pair `" + entry.pair_id +
                                             "` has mismatched questions on lines " +
                                             std::to_string(entry.human.line_no) + " and " +
                                             std::to_string(entry.machine.line_no));
        }
        pairs.push_back(PairedSample{
            entry.pair_id, entry.human.question,
            TextSample(entry.pair_id + "#human", entry.human.text, Label::Human,
                       entry.human.lang, entry.human.source),
            TextSample(entry.pair_id + "#machine", entry.machine.text, Label::Machine,
                       entry.machine.lang, entry.machine.source)});
    }
    return pairs;
}

void save_paired(const std::vector<PairedSample>& pairs, const std::filesystem::path& path) {
    std::string out;
    for (const PairedSample& pair : pairs) {
        const struct {
            const char* role;
            const TextSample* sample;
        } halves[] = {{"human", &pair.human_answer}, {"machine", &pair.machine_answer}};
        for (const auto& half : halves) {
            json j{{"pair_id", pair.pair_id},     {"question", pair.question},
                   {"role", half.role},           {"text", half.sample->content()},
                   {"lang", half.sample->lang()}, {"source", half.sample->source()}};
            out += j.dump();
            out += '\n';
        }
    }
    atomic_write_file(path, out);
}

std::vector<TextSample> flatten(const std::vector<PairedSample>& pairs) {
    std::vector<TextSample> samples;
    samples.reserve(pairs.size() * 2);
    for (const PairedSample& pair : pairs) {
        samples.push_back(pair.human_answer);
        samples.push_back(pair.machine_answer);
    }
    return samples;
}

std::vector<TextSample> generate_machine_answers(const std::vector<std::string>& questions,
                                                 RewriteProvider& provider,
                                                 const GenParams& params, CacheStore* cache,
                                                 InflightLimiter* limiter) {
    if (questions.empty()) raise(ErrorKind::EmptyCorpus, "no questions to answer");
    const std::string pdigest = params_digest(params);
    const std::string provider_id = provider.rewriter_id();

    std::vector<std::string> answers(questions.size());
    auto generate_one = [&](std::size_t i) {
        const std::string& question = questions[i];
        if (trim(question).empty()) {
            raise(ErrorKind::InvalidText, "question " + std::to_string(i) + " is blank");
        }
        CacheKey key{CacheKind::Rewrite, provider_id, "", "", pdigest,
                     sha256_hex(question),  0};
        if (cache) {
            if (auto hit = cache->get(key)) {
                answers[i] = (*hit)["text"].get<std::string>();
                return;
            }
        }
        std::string text;
        bool ok = false;
        for (int attempt = 1; attempt <= 3 && !ok; ++attempt) {
            std::string got;
            {
                InflightLimiter::Guard guard(limiter);
                got = provider.rewrite(question, "", 0, params);
            }
            if (!trim(got).empty()) {
                text = std::move(got);
                ok = true;
            }
        }
        if (!ok) {
            raise(ErrorKind::EmptyRewrite,
                  "provider returned only blank answers for question " + std::to_string(i));
        }
        if (cache) cache->put(key, json{{"text", text}});
        answers[i] = std::move(text);
    };

    const unsigned workers =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 8u));
    parallel_for_indexed(questions.size(), workers, generate_one);

    std::vector<TextSample> samples;
    samples.reserve(questions.size());
    for (std::size_t i = 0; i < questions.size(); ++i) {
        std::ostringstream id;
        id << "gen-" << i << "-" << sha256_hex(questions[i]).substr(0, 8);
        samples.emplace_back(id.str(), answers[i], Label::Machine, "", provider_id);
    }
    return samples;
}

} // namespace vb
