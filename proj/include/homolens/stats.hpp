#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "homolens/errors.hpp"

namespace homolens {

/// Compensated (Kahan) accumulator; order-independent aggregation across
/// replicas reduces in a fixed index order through one of these.
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

/// Streaming mean/variance (Welford).
class MeanVar {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double stderr_mean() const {
        return n_ > 1 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_stderr = 0.0;
    double slope_ci95 = 0.0; // half-width
    std::size_t n = 0;
};

namespace detail {
// Two-sided 97.5% Student-t quantiles for df 1..30; ~1.96 beyond.
inline double t975(std::size_t df) {
    static constexpr double table[30] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (df == 0) return std::numeric_limits<double>::infinity();
    if (df <= 30) return table[df - 1];
    return 1.96 + 2.5 / static_cast<double>(df);
}
} // namespace detail

/// Ordinary least squares y = a + b x with slope stderr and 95% CI.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InvalidConstants("linear_fit: need >= 2 paired points");
    const std::size_t n = x.size();
    KahanSum sx, sy;
    for (std::size_t i = 0; i < n; ++i) {
        sx.add(x[i]);
        sy.add(y[i]);
    }
    const double mx = sx.value() / static_cast<double>(n);
    const double my = sy.value() / static_cast<double>(n);
    KahanSum sxx, sxy, syy;
    for (std::size_t i = 0; i < n; ++i) {
        sxx.add((x[i] - mx) * (x[i] - mx));
        sxy.add((x[i] - mx) * (y[i] - my));
        syy.add((y[i] - my) * (y[i] - my));
    }
    LinearFit fit;
    fit.n = n;
    const double sxx_v = sxx.value();
    if (sxx_v <= 0.0) throw InvalidConstants("linear_fit: degenerate x values");
    fit.slope = sxy.value() / sxx_v;
    fit.intercept = my - fit.slope * mx;
    KahanSum sse;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        sse.add(r * r);
    }
    const double syy_v = syy.value();
    fit.r2 = syy_v > 0.0 ? 1.0 - sse.value() / syy_v : 1.0;
    if (n > 2) {
        const double mse = sse.value() / static_cast<double>(n - 2);
        fit.slope_stderr = std::sqrt(mse / sxx_v);
        fit.slope_ci95 = detail::t975(n - 2) * fit.slope_stderr;
    }
    return fit;
}

/// Pearson chi-square statistic of observed counts against a uniform law.
inline double chi2_uniform_statistic(std::span<const std::uint64_t> counts) {
    KahanSum total;
    for (auto c : counts) total.add(static_cast<double>(c));
    const double expected = total.value() / static_cast<double>(counts.size());
    if (expected <= 0.0) throw InvalidConstants("chi2: empty counts");
    KahanSum stat;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat.add(d * d / expected);
    }
    return stat.value();
}

/// Critical value of the chi-square distribution at alpha = 0.01.
inline double chi2_crit99(std::size_t df) {
    static constexpr double table[10] = {6.6349, 9.2103, 11.3449, 13.2767, 15.0863,
                                         16.8119, 18.4753, 20.0902, 21.6660, 23.2093};
    if (df == 0) throw InvalidConstants("chi2_crit99: df must be positive");
    if (df <= 10) return table[df - 1];
    // Wilson-Hilferty approximation
    const double z99 = 2.3263478740408408;
    const double d = static_cast<double>(df);
    const double t = 1.0 - 2.0 / (9.0 * d) + z99 * std::sqrt(2.0 / (9.0 * d));
    return d * t * t * t;
}

} // namespace homolens
