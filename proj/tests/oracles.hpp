// Independent reference implementations used as test oracles. These must not
// share code with the library paths they check: the DFT is the direct O(N^2)
// sum, the feature formulas are transcribed straight from their definitions,
// the normal quantile is bisected to machine precision, and k-means is solved
// by exhaustive assignment enumeration.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

namespace oracle {

inline std::vector<std::complex<double>> naive_dft(std::span<const float> x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    const double two_pi = 6.283185307179586476925286766559;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double a = -two_pi * static_cast<double>(k) * static_cast<double>(t) /
                             static_cast<double>(n);
            acc += static_cast<double>(x[t]) * std::complex<double>(std::cos(a), std::sin(a));
        }
        out[k] = acc;
    }
    return out;
}

// ---- straight-line transcription of the time-domain feature formulas ----

struct FeatureRow {
    double mean, abs_median, std_dev, skewness, kurtosis, crest, energy, rms;
    int peaks, zero_crossings;
    double shapiro_w, kl_emp_norm, kl_norm_emp;
};

inline double ref_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Machine-precision inverse normal CDF by bisection (no shared code with the
// library's rational-approximation path).
inline double ref_normal_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (ref_normal_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double ref_shapiro_w(std::vector<double> x) {
    const std::size_t n = x.size();
    std::sort(x.begin(), x.end());
    std::vector<double> m(n);
    double ssq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = ref_normal_quantile((i + 1 - 0.375) / (n + 0.25));
        ssq += m[i] * m[i];
    }
    const double u = 1.0 / std::sqrt(static_cast<double>(n));
    const double cn = m[n - 1] / std::sqrt(ssq);
    const double cn1 = m[n - 2] / std::sqrt(ssq);
    const double an = cn + 0.221157 * u - 0.147981 * u * u - 2.071190 * u * u * u +
                      4.434685 * u * u * u * u - 2.706056 * u * u * u * u * u;
    const double an1 = cn1 + 0.042981 * u - 0.293762 * u * u - 1.752461 * u * u * u +
                       5.682633 * u * u * u * u - 3.582633 * u * u * u * u * u;
    const double phi = (ssq - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                       (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
    std::vector<double> a(n);
    for (std::size_t i = 2; i + 2 < n; ++i) a[i] = m[i] / std::sqrt(phi);
    a[n - 1] = an;
    a[n - 2] = an1;
    a[0] = -an;
    a[1] = -an1;

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += a[i] * x[i];
        den += (x[i] - mean) * (x[i] - mean);
    }
    return std::min(1.0, num * num / den);
}

inline std::pair<double, double> ref_kl(const std::vector<double>& x) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);

    const int bins = 100;
    const double lo = mean - 5.0 * sd;
    const double w = 10.0 * sd / bins;
    std::vector<double> p(bins, 0.0), q(bins, 0.0);
    for (double v : x) {
        int b = static_cast<int>(std::floor((v - lo) / w));
        if (b < 0) b = 0;
        if (b >= bins) b = bins - 1;
        p[static_cast<std::size_t>(b)] += 1.0 / static_cast<double>(n);
    }
    for (int b = 0; b < bins; ++b)
        q[static_cast<std::size_t>(b)] = ref_normal_cdf((lo + (b + 1) * w - mean) / sd) -
                                         ref_normal_cdf((lo + b * w - mean) / sd);
    const double eps = 1e-10;
    double sp = 0.0, sq = 0.0;
    for (int b = 0; b < bins; ++b) {
        sp += p[static_cast<std::size_t>(b)] + eps;
        sq += q[static_cast<std::size_t>(b)] + eps;
    }
    double kl_pq = 0.0, kl_qp = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double pb = (p[static_cast<std::size_t>(b)] + eps) / sp;
        const double qb = (q[static_cast<std::size_t>(b)] + eps) / sq;
        kl_pq += pb * std::log(pb / qb);
        kl_qp += qb * std::log(qb / pb);
    }
    return {kl_pq, kl_qp};
}

inline FeatureRow ref_features(std::span<const float> samples) {
    std::vector<double> x(samples.begin(), samples.end());
    const std::size_t n = x.size();
    FeatureRow f{};

    for (double v : x) f.mean += v;
    f.mean /= static_cast<double>(n);

    std::vector<double> absx(n);
    for (std::size_t i = 0; i < n; ++i) absx[i] = std::fabs(x[i]);
    std::sort(absx.begin(), absx.end());
    f.abs_median = n % 2 ? absx[n / 2] : 0.5 * (absx[n / 2 - 1] + absx[n / 2]);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        m2 += std::pow(v - f.mean, 2.0);
        m3 += std::pow(v - f.mean, 3.0);
        m4 += std::pow(v - f.mean, 4.0);
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    f.std_dev = std::sqrt(m2);
    f.skewness = m3 / std::pow(m2, 1.5);
    f.kurtosis = m4 / (m2 * m2);

    for (double v : x) f.energy += v * v;
    f.rms = std::sqrt(f.energy / static_cast<double>(n));
    double max_abs = 0.0;
    for (double v : x) max_abs = std::max(max_abs, std::fabs(v));
    f.crest = max_abs / f.rms;

    for (std::size_t i = 1; i + 1 < n; ++i)
        if (x[i] > x[i - 1] && x[i] > x[i + 1] && x[i] > 2.0 * f.rms) ++f.peaks;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (x[i] * x[i + 1] < 0.0) ++f.zero_crossings;

    f.shapiro_w = ref_shapiro_w(x);
    auto [kl1, kl2] = ref_kl(x);
    f.kl_emp_norm = kl1;
    f.kl_norm_emp = kl2;
    return f;
}

// ---- exhaustive k-means -------------------------------------------------

inline double partition_inertia(const std::vector<std::vector<double>>& points,
                                const std::vector<int>& assign, int k) {
    const std::size_t dim = points.front().size();
    std::vector<std::vector<double>> centroids(static_cast<std::size_t>(k),
                                               std::vector<double>(dim, 0.0));
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t d = 0; d < dim; ++d)
            centroids[static_cast<std::size_t>(assign[i])][d] += points[i][d];
        ++counts[static_cast<std::size_t>(assign[i])];
    }
    for (int c = 0; c < k; ++c)
        if (counts[static_cast<std::size_t>(c)] > 0)
            for (std::size_t d = 0; d < dim; ++d)
                centroids[static_cast<std::size_t>(c)][d] /=
                    counts[static_cast<std::size_t>(c)];
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = points[i][d] - centroids[static_cast<std::size_t>(assign[i])][d];
            inertia += diff * diff;
        }
    return inertia;
}

/// Global optimum over every assignment of n points to k clusters.
inline double best_inertia_bruteforce(const std::vector<std::vector<double>>& points, int k) {
    const std::size_t n = points.size();
    std::vector<int> assign(n, 0);
    double best = std::numeric_limits<double>::max();
    const auto total = static_cast<std::size_t>(std::pow(k, static_cast<double>(n)) + 0.5);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t rem = code;
        for (std::size_t i = 0; i < n; ++i) {
            assign[i] = static_cast<int>(rem % static_cast<std::size_t>(k));
            rem /= static_cast<std::size_t>(k);
        }
        best = std::min(best, partition_inertia(points, assign, k));
    }
    return best;
}

// ---- central finite differences ------------------------------------------

template <typename LossFn>
double central_difference(LossFn&& loss, double& param, double h) {
    const double saved = param;
    param = saved + h;
    const double up = loss();
    param = saved - h;
    const double down = loss();
    param = saved;
    return (up - down) / (2.0 * h);
}

} // namespace oracle
