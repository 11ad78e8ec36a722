#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cmosim {

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;      // sample standard deviation, n-1 denominator
    bool degenerate = false;  // fewer than 2 samples: stddev reported as 0
};

inline MeanStd mean_std(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean_std: empty sample");
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double v : xs) sum += v;
    MeanStd out;
    out.mean = sum / n;
    if (xs.size() < 2) {
        out.degenerate = true;
        return out;
    }
    double ss = 0.0;
    for (double v : xs) {
        const double d = v - out.mean;
        ss += d * d;
    }
    out.stddev = std::sqrt(ss / (n - 1.0));
    return out;
}

// Linear-interpolation quantile (R type 7) on a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty sample");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

struct Histogram {
    std::vector<double> edges;        // nbins + 1 ascending edges
    std::vector<std::size_t> counts;  // nbins counts, sum equals sample size
};

// Freedman-Diaconis binning with a floor on the bin count. Degenerate
// samples (zero IQR or zero range) still produce min_bins bins so the
// output shape does not depend on the data.
inline Histogram build_histogram(std::vector<double> xs, std::size_t min_bins = 20) {
    if (xs.empty()) throw std::invalid_argument("build_histogram: empty sample");
    std::sort(xs.begin(), xs.end());
    double lo = xs.front();
    double hi = xs.back();
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double iqr = quantile_sorted(xs, 0.75) - quantile_sorted(xs, 0.25);
    const double n = static_cast<double>(xs.size());
    std::size_t nbins = min_bins;
    if (iqr > 0.0) {
        const double width = 2.0 * iqr / std::cbrt(n);
        const double k = std::ceil((hi - lo) / width);
        if (k > static_cast<double>(min_bins))
            nbins = static_cast<std::size_t>(std::min(k, 4096.0));
    }
    Histogram h;
    h.edges.resize(nbins + 1);
    const double step = (hi - lo) / static_cast<double>(nbins);
    for (std::size_t i = 0; i <= nbins; ++i)
        h.edges[i] = lo + step * static_cast<double>(i);
    h.edges.back() = hi;
    h.counts.assign(nbins, 0);
    for (double v : xs) {
        std::size_t idx = static_cast<std::size_t>((v - lo) / step);
        if (idx >= nbins) idx = nbins - 1;
        ++h.counts[idx];
    }
    return h;
}

// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
template <class Cdf>
inline double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    }
    return d;
}

namespace detail {

// Continued fraction for the incomplete beta function (Lentz's method).
inline double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a Student-t statistic with dof degrees of freedom.
inline double student_t_two_sided_p(double t, double dof) {
    if (dof <= 0.0) throw std::domain_error("student_t_two_sided_p: dof must be positive");
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

} // namespace cmosim
