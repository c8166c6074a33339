#include "varybalance/evaluation.hpp"

#include "varybalance/errors.hpp"
#include "varybalance/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace vb {

namespace {

void require_finite(const std::vector<double>& values, const char* which) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            raise(ErrorKind::NonFinite, std::string(which) + " scores contain a non-finite value");
        }
    }
}

void require_classes(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty()) raise(ErrorKind::EmptyClass, "positive class is empty");
    if (neg.empty()) raise(ErrorKind::EmptyClass, "negative class is empty");
    require_finite(pos, "positive");
    require_finite(neg, "negative");
}

} // namespace

const char* to_string(ScoreField field) {
    switch (field) {
    case ScoreField::Auto: return "auto";
    case ScoreField::Base: return "base";
    case ScoreField::Expansion: return "expansion";
    }
    return "base";
}

double auroc(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores) {
    require_classes(pos_scores, neg_scores);

    struct Entry {
        double score;
        bool positive;
    };
    std::vector<Entry> all;
    all.reserve(pos_scores.size() + neg_scores.size());
    for (double s : pos_scores) all.push_back({s, true});
    for (double s : neg_scores) all.push_back({s, false});
    std::sort(all.begin(), all.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        // Midrank of the tie group occupying 1-based ranks i+1 .. j.
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            if (all[t].positive) pos_rank_sum += rank;
        }
        i = j;
    }

    const double np = static_cast<double>(pos_scores.size());
    const double nn = static_cast<double>(neg_scores.size());
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<RocPoint> roc_curve(const std::vector<double>& pos_scores,
                                const std::vector<double>& neg_scores) {
    require_classes(pos_scores, neg_scores);

    std::map<double, std::pair<std::uint64_t, std::uint64_t>, std::greater<>> by_score;
    for (double s : pos_scores) by_score[s].first++;
    for (double s : neg_scores) by_score[s].second++;

    std::vector<RocPoint> points;
    points.reserve(by_score.size() + 1);
    points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    const double np = static_cast<double>(pos_scores.size());
    const double nn = static_cast<double>(neg_scores.size());
    std::uint64_t cum_pos = 0;
    std::uint64_t cum_neg = 0;
    for (const auto& [score, counts] : by_score) {
        cum_pos += counts.first;
        cum_neg += counts.second;
        points.push_back({score, static_cast<double>(cum_neg) / nn,
                          static_cast<double>(cum_pos) / np});
    }
    return points;
}

double effective_score(const VaryBalanceScore& s, ScoreField field) {
    switch (field) {
    case ScoreField::Base:
        return s.score;
    case ScoreField::Expansion:
        if (!s.score_e) {
            raise(ErrorKind::ConfigError,
                  "sample " + s.sample_id + " has no expansion score; rerun with the "
                                            "expansion variant");
        }
        return *s.score_e;
    case ScoreField::Auto:
        return s.score_e ? *s.score_e : s.score;
    }
    return s.score;
}

namespace {

ScoreField resolve_field(const std::vector<VaryBalanceScore>& scores, ScoreField requested) {
    if (requested != ScoreField::Auto) return requested;
    const bool all_expansion =
        !scores.empty() && std::all_of(scores.begin(), scores.end(),
                                       [](const VaryBalanceScore& s) {
                                           return s.score_e.has_value();
                                       });
    return all_expansion ? ScoreField::Expansion : ScoreField::Base;
}

Histogram make_histogram(const std::vector<double>& values, double lo, double hi) {
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(kHistogramBins, 0);
    const double width = hi - lo;
    for (double v : values) {
        int bin = 0;
        if (width > 0.0) {
            bin = static_cast<int>((v - lo) / width * kHistogramBins);
            bin = std::clamp(bin, 0, kHistogramBins - 1);
        }
        h.counts[static_cast<std::size_t>(bin)]++;
    }
    return h;
}

ClassStats make_stats(const std::vector<double>& values, double lo, double hi) {
    ClassStats stats;
    stats.count = values.size();
    if (values.empty()) return stats;
    double sum = 0.0;
    stats.min = values.front();
    stats.max = values.front();
    for (double v : values) {
        sum += v;
        stats.min = std::min(stats.min, v);
        stats.max = std::max(stats.max, v);
    }
    stats.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) {
        const double d = v - stats.mean;
        var += d * d;
    }
    stats.variance = var / static_cast<double>(values.size());
    stats.histogram = make_histogram(values, lo, hi);
    return stats;
}

// "<pair>#human" / "<pair>#machine" id pairing; nullopt when the ids do
// not form such a bijection.
std::optional<std::vector<std::pair<std::size_t, std::size_t>>> aligned_pairs(
    const std::vector<VaryBalanceScore>& human, const std::vector<VaryBalanceScore>& machine) {
    auto strip = [](const std::string& id, const std::string& suffix) -> std::optional<std::string> {
        if (id.size() <= suffix.size() || !id.ends_with(suffix)) return std::nullopt;
        return id.substr(0, id.size() - suffix.size());
    };
    std::map<std::string, std::size_t> machine_by_pair;
    for (std::size_t i = 0; i < machine.size(); ++i) {
        auto pair_id = strip(machine[i].sample_id, "#machine");
        if (!pair_id || machine_by_pair.count(*pair_id)) return std::nullopt;
        machine_by_pair[*pair_id] = i;
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(human.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < human.size(); ++i) {
        auto pair_id = strip(human[i].sample_id, "#human");
        if (!pair_id || !seen.insert(*pair_id).second) return std::nullopt;
        auto it = machine_by_pair.find(*pair_id);
        if (it == machine_by_pair.end()) return std::nullopt;
        pairs.emplace_back(i, it->second);
    }
    if (pairs.size() != machine.size()) return std::nullopt;
    return pairs;
}

} // namespace

MsdSeparation msd_separation(const std::vector<VaryBalanceScore>& human_scores,
                             const std::vector<VaryBalanceScore>& machine_scores) {
    if (human_scores.empty()) raise(ErrorKind::EmptyClass, "no human samples");
    if (machine_scores.empty()) raise(ErrorKind::EmptyClass, "no machine samples");

    MsdSeparation sep;
    double sum_h = 0.0;
    for (const auto& s : human_scores) sum_h += s.msd;
    double sum_m = 0.0;
    for (const auto& s : machine_scores) sum_m += s.msd;
    sep.mean_human = sum_h / static_cast<double>(human_scores.size());
    sep.mean_machine = sum_m / static_cast<double>(machine_scores.size());

    std::uint64_t wins = 0;
    std::uint64_t total = 0;
    if (auto pairs = aligned_pairs(human_scores, machine_scores)) {
        sep.aligned_pairs = true;
        total = pairs->size();
        for (const auto& [h, m] : *pairs) {
            if (human_scores[h].msd > machine_scores[m].msd) ++wins;
        }
    } else {
        total = human_scores.size() * machine_scores.size();
        for (const auto& h : human_scores) {
            for (const auto& m : machine_scores) {
                if (h.msd > m.msd) ++wins;
            }
        }
    }
    sep.pair_fraction = static_cast<double>(wins) / static_cast<double>(total);
    return sep;
}

EvalReport evaluate(const std::vector<VaryBalanceScore>& scores,
                    const std::unordered_map<std::string, Label>& labels,
                    const EvalConfig& cfg) {
    if (scores.empty()) raise(ErrorKind::EmptyClass, "no scores to evaluate");
    const ScoreField field = resolve_field(scores, cfg.score_field);

    std::vector<double> human_values;
    std::vector<double> machine_values;
    std::vector<VaryBalanceScore> human_records;
    std::vector<VaryBalanceScore> machine_records;
    for (const auto& s : scores) {
        auto it = labels.find(s.sample_id);
        const Label label = it == labels.end() ? Label::Unknown : it->second;
        if (label == Label::Unknown) {
            raise(ErrorKind::UnlabeledSample, "sample " + s.sample_id + " has no label");
        }
        const double value = effective_score(s, field);
        if (label == Label::Human) {
            human_values.push_back(value);
            human_records.push_back(s);
        } else {
            machine_values.push_back(value);
            machine_records.push_back(s);
        }
    }
    if (human_values.empty()) raise(ErrorKind::EmptyClass, "no human samples");
    if (machine_values.empty()) raise(ErrorKind::EmptyClass, "no machine samples");

    const bool human_positive = cfg.positive != Label::Machine;
    const auto& pos = human_positive ? human_values : machine_values;
    const auto& neg = human_positive ? machine_values : human_values;

    EvalReport report;
    report.positive = human_positive ? Label::Human : Label::Machine;
    report.score_field = field;
    report.auroc = auroc(pos, neg);
    report.roc_points = roc_curve(pos, neg);

    double lo = std::min(human_values.front(), machine_values.front());
    double hi = lo;
    for (const auto* values : {&human_values, &machine_values}) {
        for (double v : *values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    report.human_stats = make_stats(human_values, lo, hi);
    report.machine_stats = make_stats(machine_values, lo, hi);
    report.msd_sep = msd_separation(human_records, machine_records);

    if (cfg.threshold) {
        std::uint64_t correct = 0;
        for (double v : human_values) {
            if (v >= *cfg.threshold) ++correct;
        }
        for (double v : machine_values) {
            if (v < *cfg.threshold) ++correct;
        }
        report.accuracy_at_threshold =
            static_cast<double>(correct) / static_cast<double>(scores.size());
    }
    return report;
}

double calibrate_threshold(const std::vector<VaryBalanceScore>& scores,
                           const std::unordered_map<std::string, Label>& labels,
                           ScoreField field) {
    if (scores.empty()) raise(ErrorKind::EmptyClass, "no scores to calibrate on");
    const ScoreField resolved = resolve_field(scores, field);

    std::vector<double> human_values;
    std::vector<double> machine_values;
    for (const auto& s : scores) {
        auto it = labels.find(s.sample_id);
        const Label label = it == labels.end() ? Label::Unknown : it->second;
        if (label == Label::Unknown) {
            raise(ErrorKind::UnlabeledSample, "sample " + s.sample_id + " has no label");
        }
        (label == Label::Human ? human_values : machine_values)
            .push_back(effective_score(s, resolved));
    }
    if (human_values.empty()) raise(ErrorKind::EmptyClass, "no human samples");
    if (machine_values.empty()) raise(ErrorKind::EmptyClass, "no machine samples");

    std::set<double> candidates(human_values.begin(), human_values.end());
    candidates.insert(machine_values.begin(), machine_values.end());
    candidates.insert(std::numeric_limits<double>::infinity());

    double best_threshold = *candidates.begin();
    double best_balanced = -1.0;
    for (double t : candidates) {
        std::uint64_t tp = 0;
        for (double v : human_values) {
            if (v >= t) ++tp;
        }
        std::uint64_t tn = 0;
        for (double v : machine_values) {
            if (v < t) ++tn;
        }
        const double tpr = static_cast<double>(tp) / static_cast<double>(human_values.size());
        const double tnr = static_cast<double>(tn) / static_cast<double>(machine_values.size());
        const double balanced = (tpr + tnr) / 2.0;
        if (balanced > best_balanced) {
            best_balanced = balanced;
            best_threshold = t;
        }
    }
    return best_threshold;
}

std::string roc_csv(const std::vector<RocPoint>& points) {
    std::string out = "threshold,fpr,tpr\n";
    for (const RocPoint& p : points) {
        out += format_double(p.threshold) + "," + format_double(p.fpr) + "," +
               format_double(p.tpr) + "\n";
    }
    return out;
}

std::string histogram_csv(const ClassStats& human, const ClassStats& machine) {
    const Histogram& h = human.histogram;
    const Histogram& m = machine.histogram;
    std::string out = "bin_lo,bin_hi,human_count,machine_count\n";
    const double width = (h.hi - h.lo) / kHistogramBins;
    for (int b = 0; b < kHistogramBins; ++b) {
        const double lo = h.lo + width * b;
        const double hi = b + 1 == kHistogramBins ? h.hi : h.lo + width * (b + 1);
        const std::uint64_t hc = b < static_cast<int>(h.counts.size()) ? h.counts[b] : 0;
        const std::uint64_t mc = b < static_cast<int>(m.counts.size()) ? m.counts[b] : 0;
        out += format_double(lo) + "," + format_double(hi) + "," + std::to_string(hc) + "," +
               std::to_string(mc) + "\n";
    }
    return out;
}

json Histogram::to_json() const {
    return json{{"lo", lo}, {"hi", hi}, {"counts", counts}};
}

json ClassStats::to_json() const {
    return json{{"count", count},   {"mean", mean}, {"variance", variance},
                {"min", min},       {"max", max},   {"histogram", histogram.to_json()}};
}

json MsdSeparation::to_json() const {
    return json{{"mean_msd_human", mean_human},
                {"mean_msd_machine", mean_machine},
                {"pair_fraction", pair_fraction},
                {"aligned_pairs", aligned_pairs}};
}

json EvalReport::to_json() const {
    json roc = json::array();
    for (const RocPoint& p : roc_points) {
        roc.push_back(json{{"threshold", p.threshold}, {"fpr", p.fpr}, {"tpr", p.tpr}});
    }
    json j{{"auroc", auroc},
           {"positive", to_string(positive)},
           {"score_field", to_string(score_field)},
           {"roc_points", std::move(roc)},
           {"class_stats",
            json{{"human", human_stats.to_json()}, {"machine", machine_stats.to_json()}}},
           {"msd_separation", msd_sep.to_json()}};
    if (accuracy_at_threshold) j["accuracy_at_threshold"] = *accuracy_at_threshold;
    else j["accuracy_at_threshold"] = nullptr;
    return j;
}

} // namespace vb
