#include "bearing/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "bearing/error.hpp"
#include "bearing/stats.hpp"

namespace bearing::features {

namespace {

void require_finite(std::span<const float> samples) {
    for (float s : samples)
        if (!std::isfinite(s)) throw Error(Errc::non_finite_input, "non-finite sample");
}

double median_of_sorted(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

const std::array<const char*, TimeFeatures::kCount>& TimeFeatures::names() {
    static const std::array<const char*, kCount> n = {
        "mean",       "abs_median",  "std",          "skewness",         "kurtosis",
        "crest",      "energy",      "rms",          "peak_count",       "zero_crossings",
        "shapiro_w",  "kl_emp_norm", "kl_norm_emp"};
    return n;
}

std::array<double, TimeFeatures::kCount> TimeFeatures::values() const {
    return {mean,
            abs_median,
            std_dev,
            skewness,
            kurtosis,
            crest_factor,
            energy,
            rms,
            static_cast<double>(peak_count),
            static_cast<double>(zero_crossings),
            shapiro_w,
            kl_emp_to_normal,
            kl_normal_to_emp};
}

int count_zero_crossings(std::span<const float> samples) {
    if (samples.size() < 2) throw Error(Errc::too_short, "need at least 2 samples");
    int count = 0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i)
        if (static_cast<double>(samples[i]) * static_cast<double>(samples[i + 1]) < 0.0) ++count;
    return count;
}

int count_peaks(std::span<const float> samples) {
    if (samples.size() < 3) throw Error(Errc::too_short, "need at least 3 samples");
    double sum_sq = 0.0;
    for (float s : samples) sum_sq += static_cast<double>(s) * s;
    const double threshold = 2.0 * std::sqrt(sum_sq / static_cast<double>(samples.size()));
    int count = 0;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        const double x = samples[i];
        if (x > samples[i - 1] && x > samples[i + 1] && x > threshold) ++count;
    }
    return count;
}

double shapiro_w(std::span<const float> samples) {
    const std::size_t n = samples.size();
    if (n < 8 || n > 5000)
        throw Error(Errc::out_of_range_n, "n=" + std::to_string(n) + " outside [8, 5000]");
    require_finite(samples);

    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());

    // Blom normal scores, then Royston's polynomial-corrected coefficients.
    std::vector<double> m(n);
    double ssq_m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) /
                               (static_cast<double>(n) + 0.25));
        ssq_m += m[i] * m[i];
    }
    const double rsn = 1.0 / std::sqrt(static_cast<double>(n));
    const double cn = m[n - 1] / std::sqrt(ssq_m);
    const double cn1 = m[n - 2] / std::sqrt(ssq_m);
    const double an = cn + rsn * (0.221157 + rsn * (-0.147981 + rsn * (-2.071190 +
                                  rsn * (4.434685 + rsn * -2.706056))));
    const double an1 = cn1 + rsn * (0.042981 + rsn * (-0.293762 + rsn * (-1.752461 +
                                    rsn * (5.682633 + rsn * -3.582633))));
    const double phi =
        (ssq_m - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
        (1.0 - 2.0 * an * an - 2.0 * an1 * an1);

    std::vector<double> a(n);
    const double inv_sqrt_phi = 1.0 / std::sqrt(phi);
    for (std::size_t i = 2; i + 2 < n; ++i) a[i] = m[i] * inv_sqrt_phi;
    a[n - 1] = an;
    a[n - 2] = an1;
    a[0] = -an;
    a[1] = -an1;

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double numer = 0.0, denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        numer += a[i] * x[i];
        denom += (x[i] - mean) * (x[i] - mean);
    }
    if (denom <= 0.0) throw Error(Errc::zero_variance, "constant sample");
    return std::min(1.0, numer * numer / denom);
}

namespace detail {

double kl_between(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw Error(Errc::length_mismatch, "histogram sizes differ");
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sp += p[i] + kKlSmoothing;
        sq += q[i] + kKlSmoothing;
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = (p[i] + kKlSmoothing) / sp;
        const double qi = (q[i] + kKlSmoothing) / sq;
        kl += pi * std::log(pi / qi);
    }
    return kl;
}

} // namespace detail

std::pair<double, double> kl_divergences(std::span<const float> samples) {
    const std::size_t n = samples.size();
    if (n < 8) throw Error(Errc::too_short, "need at least 8 samples");
    require_finite(samples);

    double mean = 0.0;
    for (float s : samples) mean += s;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (float s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(n);
    if (var <= 0.0) throw Error(Errc::zero_variance, "constant sample");
    const double sd = std::sqrt(var);

    const double lo = mean - detail::kKlHalfWidthSigmas * sd;
    const double width = 2.0 * detail::kKlHalfWidthSigmas * sd / detail::kKlBins;

    std::vector<double> p(detail::kKlBins, 0.0);
    for (float s : samples) {
        int b = static_cast<int>(std::floor((static_cast<double>(s) - lo) / width));
        b = std::clamp(b, 0, detail::kKlBins - 1);
        p[static_cast<std::size_t>(b)] += 1.0;
    }
    for (double& v : p) v /= static_cast<double>(n);

    std::vector<double> q(detail::kKlBins, 0.0);
    for (int b = 0; b < detail::kKlBins; ++b) {
        const double left = (lo + b * width - mean) / sd;
        const double right = (lo + (b + 1) * width - mean) / sd;
        q[static_cast<std::size_t>(b)] = normal_cdf(right) - normal_cdf(left);
    }

    return {detail::kl_between(p, q), detail::kl_between(q, p)};
}

void write_feature_matrix_csv(std::ostream& out, std::span<const FeatureRow> rows) {
    out << "time_index";
    for (const char* prefix : {"h_", "v_"})
        for (const char* name : TimeFeatures::names()) out << "," << prefix << name;
    out << "\n";
    char buf[40];
    for (const FeatureRow& row : rows) {
        out << row.time_index;
        for (const TimeFeatures* side : {&row.horizontal, &row.vertical}) {
            for (double v : side->values()) {
                std::snprintf(buf, sizeof buf, "%.10g", v);
                out << "," << buf;
            }
        }
        out << "\n";
    }
}

TimeFeatures time_features(std::span<const float> samples) {
    const std::size_t n = samples.size();
    if (n < 8) throw Error(Errc::too_short, "need at least 8 samples");
    require_finite(samples);

    TimeFeatures f;
    double sum = 0.0, sum_sq = 0.0, max_abs = 0.0;
    for (float s : samples) {
        sum += s;
        sum_sq += static_cast<double>(s) * s;
        max_abs = std::max(max_abs, std::fabs(static_cast<double>(s)));
    }
    const double dn = static_cast<double>(n);
    f.mean = sum / dn;
    f.energy = sum_sq;
    f.rms = std::sqrt(sum_sq / dn);

    std::vector<double> abs_vals(n);
    for (std::size_t i = 0; i < n; ++i) abs_vals[i] = std::fabs(static_cast<double>(samples[i]));
    f.abs_median = median_of_sorted(abs_vals);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (float s : samples) {
        const double d = s - f.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= dn;
    m3 /= dn;
    m4 /= dn;
    f.std_dev = std::sqrt(m2);

    f.peak_count = count_peaks(samples);
    f.zero_crossings = count_zero_crossings(samples);

    if (m2 <= 0.0) {
        f.degenerate = true;
        f.crest_factor = f.rms > 0.0 ? max_abs / f.rms : 0.0;
        return f;
    }

    f.skewness = m3 / (m2 * std::sqrt(m2));
    f.kurtosis = m4 / (m2 * m2);
    f.crest_factor = max_abs / f.rms;
    f.shapiro_w = shapiro_w(samples);
    std::tie(f.kl_emp_to_normal, f.kl_normal_to_emp) = kl_divergences(samples);
    return f;
}

} // namespace bearing::features
