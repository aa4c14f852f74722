#pragma once

#include "biasaudit/score_store.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace biasaudit {

/// Piecewise-constant TPR difference over the threshold domain [0,1].
/// values[i] holds the curve on the half-open interval (edges[i], edges[i+1]];
/// the value at t = 0 is identically 0 (both TPRs are 1 there). Because both
/// TPR estimators are step functions the representation is exact.
struct DeltaCurve {
    std::vector<double> edges;   // 0 = edges[0] < ... < edges.back() = 1
    std::vector<double> values;  // one per interval, in [-1, 1]

    double eval(double t) const;
};

/// Exact difference curve tpr(present, t) - tpr(absent, t).
DeltaCurve delta_curve(const TprStep& present, const TprStep& absent);

/// Exact integral over [0,1]. Equals mean(present) - mean(absent) up to
/// rounding (the P(S>=t) integral identity for scores in [0,1]).
double integrate_delta(const DeltaCurve& curve);

/// How the "absent" side of a comparison is formed: every sibling label of
/// the attribute's group pooled together (default), or one named sibling.
struct MetricOptions {
    SampleClass cls = SampleClass::synthetic;
    std::optional<std::size_t> pairwise_label;  // sibling label index within attr's group
};

struct AveragedDelta {
    DeltaCurve curve;
    std::uint64_t subgroups_used = 0;
    std::uint64_t subgroups_skipped = 0;  // one side empty
};

/// Pointwise mean of the per-subgroup delta curves over every subgroup with
/// both sides populated. Throws NotMeasurableError when no subgroup is usable.
AveragedDelta averaged_delta_curve(const ScoreTable& table, AttributeRef attr,
                                   const MetricOptions& opts = {});

enum class BriskStarMode { signed_extremum, literal_max };

struct BriskStar {
    double value = 0.0;
    double threshold = 0.0;  // left endpoint of the extremal interval
};

struct EodSpec {
    enum class Kind { integrated, at_threshold };
    Kind kind = Kind::integrated;
    double threshold = 0.5;

    static EodSpec integrated() { return {}; }
    static EodSpec at(double t) { return {Kind::at_threshold, t}; }
};

/// Everything the audit reports for one attribute. brisk is the integral of
/// the averaged delta curve and equals the mean of subgroup_deltas up to
/// rounding. Both brisk* readings are carried: the literal threshold maximum
/// and the signed extremum of largest magnitude (positive values mean the
/// detector favours samples carrying the attribute).
struct AttributeBias {
    AttributeRef attr;
    double brisk = 0.0;
    BriskStar star_signed;
    BriskStar star_literal;
    double eod = 0.0;
    std::vector<double> subgroup_deltas;  // integrated delta per used subgroup
    std::uint64_t subgroups_used = 0;
    std::uint64_t subgroups_skipped = 0;
};

double brisk(const ScoreTable& table, AttributeRef attr, const MetricOptions& opts = {});

BriskStar brisk_star(const ScoreTable& table, AttributeRef attr,
                     BriskStarMode mode = BriskStarMode::signed_extremum,
                     const MetricOptions& opts = {});

/// Pooled TPR difference ignoring subgroup structure. Integrated mode is the
/// threshold integral of the pooled delta curve (= pooled mean difference);
/// at_threshold evaluates the pooled curves at one operating point.
double eod(const ScoreTable& table, AttributeRef attr, const EodSpec& spec = {},
           const MetricOptions& opts = {});

/// All present-side and absent-side scores pooled across subgroups, each
/// sorted ascending. The sample material of the "classical" unpaired test.
std::pair<std::vector<double>, std::vector<double>> pooled_sides(const ScoreTable& table,
                                                                 AttributeRef attr,
                                                                 const MetricOptions& opts = {});

/// Full per-attribute computation in one pass.
AttributeBias compute_attribute_bias(const ScoreTable& table, AttributeRef attr,
                                     const MetricOptions& opts = {},
                                     const EodSpec& eod_spec = {});

/// The brisk/EOD pipeline on one class's score-rate curves (rate = fraction
/// of scores >= t, the "classified as synthetic" rate). For the real class a
/// positive value therefore means samples with the attribute are misread as
/// synthetic more often; negate to read it as a correct-classification delta.
AttributeBias classwise_rate_delta(const ScoreTable& table, AttributeRef attr, SampleClass cls,
                                   const EodSpec& eod_spec = {});

} // namespace biasaudit
