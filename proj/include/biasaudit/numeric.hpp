#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace biasaudit {

// Kahan compensated accumulator. Bucket sizes reach 1e5+, where plain
// summation drift would eat into the 1e-12 identity tolerances.
class KahanSum {
public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

inline double compensated_mean(std::span<const double> xs) {
    return compensated_sum(xs) / static_cast<double>(xs.size());
}

} // namespace biasaudit
