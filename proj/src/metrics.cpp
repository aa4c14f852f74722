#include "biasaudit/metrics.hpp"

#include "biasaudit/errors.hpp"
#include "biasaudit/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace biasaudit {

namespace {

std::string attr_name(const ScoreTable& table, AttributeRef attr) {
    return table.schema().group_name(attr.group) + "." + table.schema().label_name(attr);
}

double count_ratio(std::uint64_t remaining, std::uint64_t n) {
    return static_cast<double>(remaining) / static_cast<double>(n);
}

/// Exact integral of the TPR difference of two sorted score multisets.
/// Walks the merged breakpoints keeping integer "scores consumed" counts, so
/// every interval value is a fresh two-quotient expression rather than an
/// accumulated sum.
double integrated_delta_sorted(std::span<const double> present, std::span<const double> absent) {
    const std::uint64_t np = present.size();
    const std::uint64_t na = absent.size();
    std::size_t ip = 0, ia = 0;
    double prev = 0.0;
    KahanSum integral;
    while (ip < present.size() || ia < absent.size()) {
        double pos;
        if (ia >= absent.size() || (ip < present.size() && present[ip] <= absent[ia]))
            pos = present[ip];
        else
            pos = absent[ia];
        if (pos > prev) {
            const double value = count_ratio(np - ip, np) - count_ratio(na - ia, na);
            integral.add(value * (pos - prev));
            prev = pos;
        }
        while (ip < present.size() && present[ip] == pos) ++ip;
        while (ia < absent.size() && absent[ia] == pos) ++ia;
    }
    // past the last score both rates are 0; the tail contributes nothing
    return integral.value();
}

/// Pooled TPR at a threshold from a sorted score vector: fraction >= t.
double pooled_tpr(const std::vector<double>& sorted, double t) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
    return count_ratio(sorted.end() - it, sorted.size());
}

struct Sides {
    std::vector<std::size_t> present_labels;
    std::vector<std::size_t> absent_labels;
};

Sides comparison_sides(const ScoreTable& table, AttributeRef attr, const MetricOptions& opts) {
    table.schema().check_attr(attr);
    Sides sides;
    sides.present_labels.push_back(attr.label);
    if (opts.pairwise_label) {
        const std::size_t sibling = *opts.pairwise_label;
        if (sibling >= table.schema().label_count(attr.group))
            throw ValidationError("pairwise label index out of range for group '" +
                                  table.schema().group_name(attr.group) + "'");
        if (sibling == attr.label)
            throw ValidationError("pairwise comparison label equals the attribute label");
        sides.absent_labels.push_back(sibling);
    } else {
        for (std::size_t l = 0; l < table.schema().label_count(attr.group); ++l)
            if (l != attr.label) sides.absent_labels.push_back(l);
    }
    if (sides.absent_labels.empty())
        throw NotMeasurableError("attribute '" + attr_name(table, attr) +
                                 "' has no sibling labels to compare against");
    return sides;
}

// One (position, weight) entry per unique score value of one subgroup side.
using Events = std::vector<std::pair<double, double>>;

struct AttributeScan {
    Events present_events;  // weight = count/n_present of the subgroup
    Events absent_events;   // weight = count/n_absent of the subgroup
    std::vector<double> subgroup_deltas;
    std::uint64_t used = 0;
    std::uint64_t skipped = 0;
};

void push_run_events(Events& events, std::span<const double> sorted, std::uint64_t side_total) {
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        events.emplace_back(sorted[i], count_ratio(j - i, side_total));
        i = j;
    }
}

AttributeScan scan_attribute(const ScoreTable& table, AttributeRef attr,
                             const MetricOptions& opts) {
    const Sides sides = comparison_sides(table, attr, opts);
    const std::uint64_t subgroups = table.schema().subgroup_count(attr);

    AttributeScan scan;
    std::vector<double> absent_scratch;
    for (std::uint64_t sg = 0; sg < subgroups; ++sg) {
        const auto present =
            table.combination_scores(table.schema().combine(attr, attr.label, sg), opts.cls);

        absent_scratch.clear();
        for (std::size_t l : sides.absent_labels) {
            const auto span = table.combination_scores(table.schema().combine(attr, l, sg), opts.cls);
            absent_scratch.insert(absent_scratch.end(), span.begin(), span.end());
        }
        if (present.empty() || absent_scratch.empty()) {
            ++scan.skipped;
            continue;
        }
        std::sort(absent_scratch.begin(), absent_scratch.end());

        ++scan.used;
        scan.subgroup_deltas.push_back(integrated_delta_sorted(present, absent_scratch));
        push_run_events(scan.present_events, present, present.size());
        push_run_events(scan.absent_events, absent_scratch, absent_scratch.size());
    }
    if (scan.used == 0)
        throw NotMeasurableError("attribute '" + attr_name(table, attr) +
                                 "' not measurable: no subgroup has scores on both sides");
    return scan;
}

/// Walks the summed (pre-division) delta curve of all used subgroups.
/// fn(left, right, sum) is called once per constant interval, left-to-right.
template <typename F>
void walk_sum_curve(AttributeScan& scan, F&& fn) {
    auto by_pos = [](const auto& a, const auto& b) { return a.first < b.first; };
    std::stable_sort(scan.present_events.begin(), scan.present_events.end(), by_pos);
    std::stable_sort(scan.absent_events.begin(), scan.absent_events.end(), by_pos);

    std::size_t ip = 0, ia = 0;
    double prev = 0.0;
    KahanSum sum;
    while (ip < scan.present_events.size() || ia < scan.absent_events.size()) {
        double pos;
        if (ia >= scan.absent_events.size() ||
            (ip < scan.present_events.size() && scan.present_events[ip].first <= scan.absent_events[ia].first))
            pos = scan.present_events[ip].first;
        else
            pos = scan.absent_events[ia].first;

        if (pos > prev) {
            fn(prev, pos, sum.value());
            prev = pos;
        }
        // A score leaving the ">= t" set lowers its own TPR; jumps are
        // grouped per side so a present/absent label swap negates exactly.
        KahanSum wp, wa;
        while (ip < scan.present_events.size() && scan.present_events[ip].first == pos)
            wp.add(scan.present_events[ip++].second);
        while (ia < scan.absent_events.size() && scan.absent_events[ia].first == pos)
            wa.add(scan.absent_events[ia++].second);
        sum.add(wa.value() - wp.value());
    }
    if (prev < 1.0) fn(prev, 1.0, sum.value());
}

struct CurveSummary {
    double integral = 0.0;
    double max_value = 0.0;
    double max_left = 0.0;
    double min_value = 0.0;
    double min_left = 0.0;
    bool any = false;
};

CurveSummary summarize_average(AttributeScan& scan) {
    const double m = static_cast<double>(scan.used);
    CurveSummary s;
    KahanSum integral;
    walk_sum_curve(scan, [&](double left, double right, double sum) {
        const double value = sum / m;
        integral.add(value * (right - left));
        if (!s.any || value > s.max_value) {
            s.max_value = value;
            s.max_left = left;
        }
        if (!s.any || value < s.min_value) {
            s.min_value = value;
            s.min_left = left;
        }
        s.any = true;
    });
    s.integral = integral.value();
    return s;
}

BriskStar pick_star(const CurveSummary& s, BriskStarMode mode) {
    if (mode == BriskStarMode::literal_max) {
        // the curve is exactly 0 at t = 0, so the literal maximum never
        // drops below zero
        if (s.max_value > 0.0) return {s.max_value, s.max_left};
        return {0.0, 0.0};
    }
    if (std::fabs(s.max_value) >= std::fabs(s.min_value)) return {s.max_value, s.max_left};
    return {s.min_value, s.min_left};
}

std::vector<double> pooled_side(const ScoreTable& table, AttributeRef attr,
                                const std::vector<std::size_t>& labels, SampleClass cls) {
    std::vector<double> pooled;
    const std::uint64_t subgroups = table.schema().subgroup_count(attr);
    for (std::uint64_t sg = 0; sg < subgroups; ++sg) {
        for (std::size_t l : labels) {
            const auto span = table.combination_scores(table.schema().combine(attr, l, sg), cls);
            pooled.insert(pooled.end(), span.begin(), span.end());
        }
    }
    std::sort(pooled.begin(), pooled.end());
    return pooled;
}

double pooled_eod(const ScoreTable& table, AttributeRef attr, const EodSpec& spec,
                  const MetricOptions& opts) {
    const Sides sides = comparison_sides(table, attr, opts);
    const std::vector<double> present = pooled_side(table, attr, sides.present_labels, opts.cls);
    const std::vector<double> absent = pooled_side(table, attr, sides.absent_labels, opts.cls);
    if (present.empty() || absent.empty())
        throw NotMeasurableError("attribute '" + attr_name(table, attr) +
                                 "' has an empty pooled side; EOD undefined");
    if (spec.kind == EodSpec::Kind::integrated)
        return integrated_delta_sorted(present, absent);
    if (!(spec.threshold >= 0.0 && spec.threshold <= 1.0))
        throw ValidationError("EOD threshold must lie in [0,1]");
    return pooled_tpr(present, spec.threshold) - pooled_tpr(absent, spec.threshold);
}

} // namespace

double DeltaCurve::eval(double t) const {
    if (edges.empty() || t <= edges.front()) return 0.0;
    const auto it = std::lower_bound(edges.begin() + 1, edges.end(), t);
    const auto i = static_cast<std::size_t>(it - (edges.begin() + 1));
    if (i >= values.size()) return 0.0;  // t beyond the domain
    return values[i];
}

DeltaCurve delta_curve(const TprStep& present, const TprStep& absent) {
    if (present.n == 0 || absent.n == 0) throw EmptyBucketError("delta_curve on empty bucket");

    DeltaCurve curve;
    curve.edges.push_back(0.0);
    std::size_t ip = 0, ia = 0;
    std::uint64_t remain_p = present.n, remain_a = absent.n;
    double prev = 0.0;
    while (ip < present.values.size() || ia < absent.values.size()) {
        double pos;
        if (ia >= absent.values.size() ||
            (ip < present.values.size() && present.values[ip] <= absent.values[ia]))
            pos = present.values[ip];
        else
            pos = absent.values[ia];
        if (pos > prev) {
            curve.edges.push_back(pos);
            curve.values.push_back(count_ratio(remain_p, present.n) -
                                   count_ratio(remain_a, absent.n));
            prev = pos;
        }
        if (ip < present.values.size() && present.values[ip] == pos) {
            remain_p = ip + 1 < present.values.size() ? present.ge_count[ip + 1] : 0;
            ++ip;
        }
        if (ia < absent.values.size() && absent.values[ia] == pos) {
            remain_a = ia + 1 < absent.values.size() ? absent.ge_count[ia + 1] : 0;
            ++ia;
        }
    }
    if (prev < 1.0) {
        curve.edges.push_back(1.0);
        curve.values.push_back(count_ratio(remain_p, present.n) - count_ratio(remain_a, absent.n));
    }
    return curve;
}

double integrate_delta(const DeltaCurve& curve) {
    KahanSum integral;
    for (std::size_t i = 0; i < curve.values.size(); ++i)
        integral.add(curve.values[i] * (curve.edges[i + 1] - curve.edges[i]));
    return integral.value();
}

AveragedDelta averaged_delta_curve(const ScoreTable& table, AttributeRef attr,
                                   const MetricOptions& opts) {
    AttributeScan scan = scan_attribute(table, attr, opts);
    const double m = static_cast<double>(scan.used);

    AveragedDelta out;
    out.subgroups_used = scan.used;
    out.subgroups_skipped = scan.skipped;
    out.curve.edges.push_back(0.0);
    walk_sum_curve(scan, [&](double /*left*/, double right, double sum) {
        out.curve.edges.push_back(right);
        out.curve.values.push_back(sum / m);
    });
    return out;
}

double brisk(const ScoreTable& table, AttributeRef attr, const MetricOptions& opts) {
    AttributeScan scan = scan_attribute(table, attr, opts);
    return summarize_average(scan).integral;
}

BriskStar brisk_star(const ScoreTable& table, AttributeRef attr, BriskStarMode mode,
                     const MetricOptions& opts) {
    AttributeScan scan = scan_attribute(table, attr, opts);
    return pick_star(summarize_average(scan), mode);
}

double eod(const ScoreTable& table, AttributeRef attr, const EodSpec& spec,
           const MetricOptions& opts) {
    return pooled_eod(table, attr, spec, opts);
}

std::pair<std::vector<double>, std::vector<double>> pooled_sides(const ScoreTable& table,
                                                                 AttributeRef attr,
                                                                 const MetricOptions& opts) {
    const Sides sides = comparison_sides(table, attr, opts);
    return {pooled_side(table, attr, sides.present_labels, opts.cls),
            pooled_side(table, attr, sides.absent_labels, opts.cls)};
}

AttributeBias compute_attribute_bias(const ScoreTable& table, AttributeRef attr,
                                     const MetricOptions& opts, const EodSpec& eod_spec) {
    AttributeScan scan = scan_attribute(table, attr, opts);
    const CurveSummary summary = summarize_average(scan);

    AttributeBias bias;
    bias.attr = attr;
    bias.brisk = summary.integral;
    bias.star_signed = pick_star(summary, BriskStarMode::signed_extremum);
    bias.star_literal = pick_star(summary, BriskStarMode::literal_max);
    bias.eod = pooled_eod(table, attr, eod_spec, opts);
    bias.subgroup_deltas = std::move(scan.subgroup_deltas);
    bias.subgroups_used = scan.used;
    bias.subgroups_skipped = scan.skipped;
    return bias;
}

AttributeBias classwise_rate_delta(const ScoreTable& table, AttributeRef attr, SampleClass cls,
                                   const EodSpec& eod_spec) {
    if (table.class_count(cls) == 0)
        throw NotMeasurableError(std::string("no records of class '") +
                                 std::string(to_string(cls)) + "' in table '" + table.detector() +
                                 "'");
    MetricOptions opts;
    opts.cls = cls;
    return compute_attribute_bias(table, attr, opts, eod_spec);
}

} // namespace biasaudit
