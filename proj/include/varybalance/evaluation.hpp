#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "varybalance/types.hpp"

namespace vb {

inline constexpr int kHistogramBins = 30;

// One ROC operating point: classify score >= threshold as positive.
struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;

    friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// Equal-width bins over [lo, hi]; the top edge is inclusive.
struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::uint64_t> counts;

    json to_json() const;
};

struct ClassStats {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0; // population
    double min = 0.0;
    double max = 0.0;
    Histogram histogram;

    json to_json() const;
};

struct MsdSeparation {
    double mean_human = 0.0;
    double mean_machine = 0.0;
    // Fraction of (human, machine) pairs with msd_human strictly greater.
    double pair_fraction = 0.0;
    bool aligned_pairs = false;

    json to_json() const;
};

// Which score a VaryBalanceScore contributes to ranking metrics. Auto
// resolves to Expansion when every record carries an expansion score.
enum class ScoreField { Auto, Base, Expansion };

const char* to_string(ScoreField field);

struct EvalConfig {
    Label positive = Label::Human;
    ScoreField score_field = ScoreField::Auto;
    std::optional<double> threshold;
};

struct EvalReport {
    double auroc = 0.0;
    std::vector<RocPoint> roc_points;
    std::optional<double> accuracy_at_threshold;
    ClassStats human_stats;
    ClassStats machine_stats;
    MsdSeparation msd_sep;
    Label positive = Label::Human;
    ScoreField score_field = ScoreField::Base; // as resolved

    json to_json() const;
};

// Probability that a random positive outranks a random negative, ties at
// half weight (midrank formulation). Raises EmptyClass on an empty side,
// NonFinite on non-finite scores.
double auroc(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

// Threshold sweep over the distinct scores, descending; starts at (0,0)
// with an infinite threshold and ends at (1,1). Trapezoidal area under the
// points equals auroc().
std::vector<RocPoint> roc_curve(const std::vector<double>& pos_scores,
                                const std::vector<double>& neg_scores);

// The ranking value a record contributes under `field`. Raises ConfigError
// when Expansion is requested but the record has no expansion score.
double effective_score(const VaryBalanceScore& s, ScoreField field);

// Full report over labeled detection results. Every sample id must map to
// Human or Machine in `labels` (UnlabeledSample names the offender) and
// both classes must be present (EmptyClass).
EvalReport evaluate(const std::vector<VaryBalanceScore>& scores,
                    const std::unordered_map<std::string, Label>& labels,
                    const EvalConfig& cfg = {});

// Class means of the msd field plus the fraction of pairs where the human
// msd strictly exceeds the machine msd. Ids of the form "<pair>#human" /
// "<pair>#machine" with matching pair sets compare aligned pairs only;
// anything else compares all cross pairs.
MsdSeparation msd_separation(const std::vector<VaryBalanceScore>& human_scores,
                             const std::vector<VaryBalanceScore>& machine_scores);

// Threshold maximizing balanced accuracy for classify(score >= t => Human)
// over the candidate thresholds observed in `scores`; ties resolve to the
// smallest threshold.
double calibrate_threshold(const std::vector<VaryBalanceScore>& scores,
                           const std::unordered_map<std::string, Label>& labels,
                           ScoreField field = ScoreField::Auto);

// CSV renderings for plotting: "threshold,fpr,tpr" and per-bin class
// counts over the shared histogram range.
std::string roc_csv(const std::vector<RocPoint>& points);
std::string histogram_csv(const ClassStats& human, const ClassStats& machine);

} // namespace vb
