#include "biasaudit/stats.hpp"

#include "biasaudit/errors.hpp"
#include "biasaudit/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace biasaudit {

namespace {

// ---------------------------------------------------------------------------
// Regularized incomplete beta I_x(a, 1/2), the only shape the t-distribution
// needs. Continued fraction after Lentz with the usual symmetric split at
// x = (a+1)/(a+b+2).
// ---------------------------------------------------------------------------

constexpr double CF_EPS = 1e-15;
constexpr double CF_FPMIN = 1e-300;
constexpr int CF_MAXIT = 4000;

double beta_cf(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < CF_FPMIN) d = CF_FPMIN;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= CF_MAXIT; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < CF_FPMIN) d = CF_FPMIN;
        c = 1.0 + aa / c;
        if (std::fabs(c) < CF_FPMIN) c = CF_FPMIN;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < CF_FPMIN) d = CF_FPMIN;
        c = 1.0 + aa / c;
        if (std::fabs(c) < CF_FPMIN) c = CF_FPMIN;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < CF_EPS) return h;
    }
    throw ValidationError("incomplete beta continued fraction failed to converge (a=" +
                          std::to_string(a) + ", x=" + std::to_string(x) + ")");
}

// ln B(a, 1/2). std::lgamma loses absolute accuracy once its result is large,
// so past a = 1e4 the Gamma-ratio asymptotic series is used instead:
// Gamma(a+1/2)/Gamma(a) ~ sqrt(a) * (1 - 1/(8a) + 1/(128a^2) + 5/(1024a^3) - ...)
double ln_beta_half(double a) {
    if (a < 1e4) return std::lgamma(a) + std::lgamma(0.5) - std::lgamma(a + 0.5);
    const double inv = 1.0 / a;
    const double series =
        1.0 + inv * (-1.0 / 8.0 + inv * (1.0 / 128.0 + inv * (5.0 / 1024.0 + inv * (-21.0 / 32768.0))));
    const double ln_ratio = 0.5 * std::log(a) + std::log(series);
    return 0.5 * std::log(M_PI) - ln_ratio;
}

double log_given_complement(double v, double complement) {
    // accurate ln(v) with complement = 1-v known exactly
    return v <= 0.5 ? std::log(v) : std::log1p(-complement);
}

// I_x(a, 1/2) with xc = 1-x supplied by the caller so neither side suffers
// cancellation.
double inc_beta_half(double a, double x, double xc) {
    if (x <= 0.0) return 0.0;
    if (xc <= 0.0) return 1.0;
    const double b = 0.5;
    const double ln_bt =
        a * log_given_complement(x, xc) + b * log_given_complement(xc, x) - ln_beta_half(a);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, xc) / b;
}

bool all_equal(std::span<const double> xs) {
    for (double v : xs)
        if (v != xs.front()) return false;
    return true;
}

double sample_variance(std::span<const double> xs, double mean) {
    KahanSum ss;
    for (double v : xs) {
        const double d = v - mean;
        ss.add(d * d);
    }
    return ss.value() / static_cast<double>(xs.size() - 1);
}

std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && xs[order[j]] == xs[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;  // 1-based
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

double pearson_coefficient(std::span<const double> x, std::span<const double> y) {
    const double mx = compensated_mean(x);
    const double my = compensated_mean(y);
    KahanSum sxy, sxx, syy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    if (sxx.value() == 0.0 || syy.value() == 0.0)
        throw ValidationError("undefined correlation: constant input vector");
    return sxy.value() / std::sqrt(sxx.value() * syy.value());
}

} // namespace

double student_t_sf(double t, double df) {
    if (!(df >= 1.0)) throw ValidationError("degrees of freedom must be >= 1");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    const double x = df / (df + t2);
    const double xc = t2 / (df + t2);
    return inc_beta_half(0.5 * df, x, xc);
}

double bonferroni(double alpha, std::uint64_t m) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("alpha must lie in (0,1), got " + std::to_string(alpha));
    if (m < 1) throw ValidationError("test count m must be >= 1");
    return alpha / static_cast<double>(m);
}

TTestResult paired_ttest(std::span<const double> deltas) {
    if (deltas.size() < 2)
        throw ValidationError("insufficient subgroups for paired t-test (need >= 2, got " +
                              std::to_string(deltas.size()) + ")");
    TTestResult res;
    res.n = deltas.size();
    res.degrees_of_freedom = static_cast<double>(deltas.size() - 1);

    if (all_equal(deltas)) {
        res.mean_diff = deltas.front();
        res.degenerate = true;
        if (res.mean_diff == 0.0) {
            res.t_statistic = 0.0;
            res.p_value = 1.0;
        } else {
            res.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), res.mean_diff);
            res.p_value = 0.0;
        }
        return res;
    }

    // summation over the sorted sequence makes the result independent of the
    // caller's subgroup ordering, bit for bit
    std::vector<double> sorted(deltas.begin(), deltas.end());
    std::sort(sorted.begin(), sorted.end());
    res.mean_diff = compensated_mean(sorted);
    const double var = sample_variance(sorted, res.mean_diff);
    res.t_statistic = res.mean_diff / std::sqrt(var / static_cast<double>(sorted.size()));
    res.p_value = student_t_sf(res.t_statistic, res.degrees_of_freedom);
    return res;
}

TTestResult two_sample_ttest(std::span<const double> group_a, std::span<const double> group_b) {
    if (group_a.size() < 2 || group_b.size() < 2)
        throw ValidationError("insufficient samples for two-sample t-test (need >= 2 per group)");
    TTestResult res;
    res.n = group_a.size() + group_b.size();
    const double ma = compensated_mean(group_a);
    const double mb = compensated_mean(group_b);
    res.mean_diff = ma - mb;

    if (all_equal(group_a) && all_equal(group_b)) {
        res.degenerate = true;
        res.degrees_of_freedom = static_cast<double>(res.n - 2);
        if (res.mean_diff == 0.0) {
            res.t_statistic = 0.0;
            res.p_value = 1.0;
        } else {
            res.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), res.mean_diff);
            res.p_value = 0.0;
        }
        return res;
    }

    const double ga = sample_variance(group_a, ma) / static_cast<double>(group_a.size());
    const double gb = sample_variance(group_b, mb) / static_cast<double>(group_b.size());
    res.t_statistic = res.mean_diff / std::sqrt(ga + gb);
    // Welch-Satterthwaite degrees of freedom
    res.degrees_of_freedom = (ga + gb) * (ga + gb) /
                             (ga * ga / static_cast<double>(group_a.size() - 1) +
                              gb * gb / static_cast<double>(group_b.size() - 1));
    res.degrees_of_freedom = std::max(res.degrees_of_freedom, 1.0);
    res.p_value = student_t_sf(res.t_statistic, res.degrees_of_freedom);
    return res;
}

CorrelationResult correlation(std::span<const double> x, std::span<const double> y,
                              CorrelationMethod method) {
    if (x.size() != y.size())
        throw ValidationError("correlation inputs differ in length (" + std::to_string(x.size()) +
                              " vs " + std::to_string(y.size()) + ")");
    if (x.size() < 2) throw ValidationError("correlation needs at least 2 points");

    CorrelationResult res;
    res.n = x.size();
    res.method = method;
    if (method == CorrelationMethod::pearson) {
        res.coefficient = pearson_coefficient(x, y);
    } else {
        const std::vector<double> rx = average_ranks(x);
        const std::vector<double> ry = average_ranks(y);
        res.coefficient = pearson_coefficient(rx, ry);
    }
    return res;
}

std::vector<std::vector<double>> correlation_matrix(const std::vector<std::vector<double>>& vectors,
                                                    CorrelationMethod method) {
    if (vectors.empty()) throw ValidationError("correlation matrix needs at least one vector");
    const std::size_t len = vectors.front().size();
    for (const auto& v : vectors)
        if (v.size() != len) throw ValidationError("correlation matrix vectors differ in length");

    const std::size_t n = vectors.size();
    std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = correlation(vectors[i], vectors[j], method).coefficient;
            matrix[i][j] = r;
            matrix[j][i] = r;
        }
    }
    return matrix;
}

} // namespace biasaudit
