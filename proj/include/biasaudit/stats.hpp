#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace biasaudit {

struct TTestResult {
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;  // fractional for the Welch test
    double p_value = 1.0;             // two-sided
    std::size_t n = 0;
    double mean_diff = 0.0;
    bool degenerate = false;  // zero variance
};

/// One-sample t-test of whether the per-subgroup integrated deltas have zero
/// mean. Uses the sample (n-1) standard deviation; a zero-variance input is
/// flagged degenerate with p = 1 (mean 0) or p = 0 (mean != 0).
/// Throws ValidationError for n < 2.
TTestResult paired_ttest(std::span<const double> deltas);

/// Welch's two-sample t-test (unequal variances) on pooled per-sample
/// values. The "classical" baseline that ignores subgroup pairing.
TTestResult two_sample_ttest(std::span<const double> group_a, std::span<const double> group_b);

/// Two-sided Student-t survival probability 2*P(T >= |t|), evaluated through
/// the regularized incomplete beta function I_x(df/2, 1/2), x = df/(df+t^2).
/// Absolute error below 1e-10 for df <= 1e6, |t| <= 50. df may be fractional
/// (Welch); must be >= 1.
double student_t_sf(double t, double df);

/// Bonferroni-adjusted significance threshold alpha / m.
double bonferroni(double alpha, std::uint64_t m);

enum class CorrelationMethod { pearson, spearman };

struct CorrelationResult {
    double coefficient = 0.0;
    std::size_t n = 0;
    CorrelationMethod method = CorrelationMethod::pearson;
};

/// Pearson product-moment or Spearman rank correlation (average ranks for
/// ties). Throws ValidationError on length mismatch, n < 2, or a constant
/// input vector (undefined correlation).
CorrelationResult correlation(std::span<const double> x, std::span<const double> y,
                              CorrelationMethod method = CorrelationMethod::pearson);

/// Pairwise correlation matrix of equally long vectors: symmetric with unit
/// diagonal.
std::vector<std::vector<double>> correlation_matrix(
    const std::vector<std::vector<double>>& vectors,
    CorrelationMethod method = CorrelationMethod::pearson);

} // namespace biasaudit
