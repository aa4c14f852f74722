#pragma once

#include "biasaudit/metrics.hpp"
#include "biasaudit/schema.hpp"
#include "biasaudit/score_store.hpp"
#include "biasaudit/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace biasaudit {

/// Audit knobs shared by the library entry points and the CLI.
struct AuditOptions {
    double alpha = 0.01;
    /// Bonferroni denominator override (e.g. a fixed a-priori accounting such
    /// as 250 = 25 attributes x 5 detectors x 2 generators). Defaults to the
    /// executed-test count; must not undercut it.
    std::optional<std::uint64_t> m_override;
    BriskStarMode star_mode = BriskStarMode::signed_extremum;
    EodSpec eod_spec;
    /// Pairwise comparison: restrict the audit to the named label's group and
    /// compare each sibling against that label alone. Empty = pooled rest.
    std::optional<std::string> pairwise_label;
    double max_skip_fraction = 0.1;
    SampleClass cls = SampleClass::synthetic;
    /// Attribute filter: bare labels or group.label names; empty = all labels.
    std::vector<std::string> attribute_filter;
    std::uint64_t seed = 0;
};

enum class AttributeStatus { ok, skip_limit_exceeded, not_measurable };
enum class TestMethod { paired, welch_fallback, none };

std::string_view to_string(AttributeStatus s);
std::string_view to_string(TestMethod m);

struct AttributeReport {
    std::string group;
    std::string label;
    AttributeStatus status = AttributeStatus::ok;
    AttributeBias bias;  // meaningless when status == not_measurable
    TTestResult test;
    TestMethod test_method = TestMethod::none;
    bool significant = false;
    std::string note;
};

struct DetectorReport {
    std::string name;
    std::string dataset;
    std::size_t rows = 0;
    std::vector<std::string> warnings;
    std::vector<AttributeReport> attributes;  // schema order, filtered
};

struct BiasReportSet {
    AuditOptions options;
    std::vector<std::string> attribute_names;  // "group.label", audit universe
    std::uint64_t executed_tests = 0;
    std::uint64_t bonferroni_m = 0;
    double significance_threshold = 0.0;
    std::vector<DetectorReport> detectors;

    bool any_failure() const;
};

/// Full audit of one or more score tables sharing a schema: per (detector,
/// attribute) brisk, brisk* (both modes), EOD, paired t-test over subgroup
/// deltas, Bonferroni significance. Attributes whose pairing is impossible
/// (a single usable subgroup) fall back to the pooled Welch test and are
/// labeled as such. Deterministic ordering throughout.
BiasReportSet run_audit(std::span<const ScoreTable> tables, const AuditOptions& opts = {});

enum class BiasMetric { brisk, brisk_star };

struct CorrelationMatrix {
    std::vector<std::string> names;            // detector names
    std::vector<std::string> attributes_used;  // ok in every detector
    std::vector<std::vector<double>> values;   // symmetric, unit diagonal
    CorrelationMethod method = CorrelationMethod::pearson;
    BiasMetric metric = BiasMetric::brisk;
};

/// Inter-detector bias correlation over the shared attribute vectors.
CorrelationMatrix compare_detectors(const BiasReportSet& reports,
                                    BiasMetric metric = BiasMetric::brisk,
                                    CorrelationMethod method = CorrelationMethod::pearson);

struct ProportionCorrelation {
    std::string detector;
    CorrelationResult result;
    std::vector<std::string> missing;  // report attributes absent from the map
    std::size_t attributes_used = 0;
};

/// Correlation between each detector's per-attribute bias values and the
/// attribute proportions of a training set. Proportion keys may be bare
/// labels or group.label names.
std::vector<ProportionCorrelation> correlate_with_proportions(
    const BiasReportSet& reports, const std::map<std::string, double>& proportions,
    BiasMetric metric = BiasMetric::brisk,
    CorrelationMethod method = CorrelationMethod::pearson);

/// Parses the proportions CSV (header: attribute,proportion).
std::map<std::string, double> load_proportions_csv(const std::filesystem::path& path);

struct TestComparisonRow {
    std::string group;
    std::string label;
    double classical_p = 1.0;  // Welch on the pooled sides
    double paired_p = 1.0;     // paired t-test over subgroup deltas
    TestMethod paired_method = TestMethod::paired;
    std::uint64_t subgroups_used = 0;
};

/// Classical-vs-paired p-value comparison per attribute, sorted by
/// descending (classical - paired) gap. Unmeasurable attributes are omitted.
std::vector<TestComparisonRow> compare_test_strategies(const ScoreTable& table,
                                                       const AuditOptions& opts = {});

struct SweepCell {
    double fraction = 1.0;
    double mean_abs_eod = 0.0;  // over successful repetitions
    double std_abs_eod = 0.0;   // population std over repetitions
    std::vector<double> rep_values;
    std::uint64_t attrs_excluded_total = 0;  // attr/rep pairs with an empty side
    std::uint64_t failed_reps = 0;           // repetitions with no computable attribute
};

struct SweepResult {
    std::vector<SweepCell> cells;          // one per requested fraction, input order
    double full_mean_abs_eod = 0.0;        // full-table attribute-averaged |EOD|
    double full_mean_abs_brisk = 0.0;      // full-table reference line
    std::uint64_t repetitions = 0;
};

/// Subsample-stability sweep: for each fraction, R independent subsamples and
/// the attribute-averaged |EOD| of each.
SweepResult subsample_sweep(const ScoreTable& table, std::span<const double> fractions,
                            std::uint64_t repetitions, std::uint64_t seed,
                            const AuditOptions& opts = {});

// --- file emission (JSON + CSV + SVG charts) -------------------------------

/// report.json, report.csv, chart_brisk_<detector>.svg and
/// chart_brisk_star_<detector>.svg under out_dir. Byte-identical for
/// identical inputs apart from the generated_at metadata line.
void emit_reports(const BiasReportSet& reports, const std::filesystem::path& out_dir);

void emit_correlation_matrix(const CorrelationMatrix& matrix,
                             const std::filesystem::path& out_dir);
void emit_proportion_correlations(const std::vector<ProportionCorrelation>& rows,
                                  const std::filesystem::path& out_dir);
void emit_test_comparison(const std::vector<TestComparisonRow>& rows,
                          const std::filesystem::path& out_dir);
void emit_sweep(const SweepResult& sweep, const std::filesystem::path& out_dir);

/// Rebuilds the per-attribute metric values of an emitted report.json; enough
/// structure for the corr subcommand to operate on.
BiasReportSet load_report_json(const std::filesystem::path& path);

} // namespace biasaudit
