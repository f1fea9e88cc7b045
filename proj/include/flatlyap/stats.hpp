#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "flatlyap/errors.hpp"

namespace flatlyap {

/// Mean of i.i.d. per-path values with a 95% batch-means confidence half-width.
struct BatchEstimate {
    double mean = 0.0;
    double ci = 0.0;  ///< half-width of the 95% interval
    std::size_t n_batches = 0;
    std::size_t n_values = 0;
};

inline double student_quantile_975(std::size_t dof) {
    if (dof == 0) return std::numeric_limits<double>::infinity();
    boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.975);
}

/// Paths are split into `n_batches` contiguous batches in index order; the
/// half-width uses the Student quantile with n_batches - 1 degrees of freedom.
inline BatchEstimate batch_means(std::span<const double> values, std::size_t n_batches) {
    BatchEstimate out;
    out.n_values = values.size();
    if (values.empty()) throw Error("batch_means: no values");
    n_batches = std::clamp<std::size_t>(n_batches, 1, values.size());
    out.n_batches = n_batches;

    double total = 0.0;
    for (double v : values) total += v;
    out.mean = total / static_cast<double>(values.size());
    if (n_batches < 2) {
        out.ci = std::numeric_limits<double>::infinity();
        return out;
    }

    std::vector<double> means(n_batches, 0.0);
    const std::size_t n = values.size();
    for (std::size_t b = 0; b < n_batches; ++b) {
        const std::size_t lo = b * n / n_batches;
        const std::size_t hi = (b + 1) * n / n_batches;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += values[i];
        means[b] = s / static_cast<double>(hi - lo);
    }
    double grand = 0.0;
    for (double m : means) grand += m;
    grand /= static_cast<double>(n_batches);
    double ss = 0.0;
    for (double m : means) ss += (m - grand) * (m - grand);
    const double sd = std::sqrt(ss / static_cast<double>(n_batches - 1));
    out.ci = student_quantile_975(n_batches - 1) * sd / std::sqrt(static_cast<double>(n_batches));
    return out;
}

/// Sample mean and standard error of the mean.
struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
};

inline MeanStderr mean_stderr(std::span<const double> values) {
    MeanStderr out;
    if (values.empty()) return out;
    double s = 0.0;
    for (double v : values) s += v;
    out.mean = s / static_cast<double>(values.size());
    if (values.size() < 2) return out;
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
    return out;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Asymptotic KS rejection threshold at level alpha: c(alpha) * sqrt((n+m)/(n m)).
inline double ks_critical(std::size_t n, std::size_t m, double alpha = 0.001) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

}  // namespace flatlyap
