#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace bearing::features {

/// The thirteen per-channel time-domain statistics fed to the classifier.
/// Moments are population (1/n) throughout. When the sample variance is zero
/// the moment-ratio and distribution-shape fields are undefined; they are
/// zeroed and `degenerate` is set instead of throwing.
struct TimeFeatures {
    double mean = 0.0;
    double abs_median = 0.0;
    double std_dev = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;      // plain standardized fourth moment (3 for normal)
    double crest_factor = 0.0;
    double energy = 0.0;
    double rms = 0.0;
    int peak_count = 0;
    int zero_crossings = 0;
    double shapiro_w = 0.0;
    double kl_emp_to_normal = 0.0;
    double kl_normal_to_emp = 0.0;
    bool degenerate = false;

    static constexpr std::size_t kCount = 13;
    static const std::array<const char*, kCount>& names();
    std::array<double, kCount> values() const;
};

TimeFeatures time_features(std::span<const float> samples);

/// Sign changes: pairs with samples[i] * samples[i+1] < 0. Exact zeros do
/// not count.
int count_zero_crossings(std::span<const float> samples);

/// Strict local maxima exceeding twice the signal RMS.
int count_peaks(std::span<const float> samples);

/// Shapiro-Wilk W statistic (Royston 1995 / AS R94 coefficients), for
/// 8 <= n <= 5000. Returns W only, no p-value.
double shapiro_w(std::span<const float> samples);

/// KL(empirical || fitted normal) and KL(fitted normal || empirical), in
/// nats, over a 100-bin histogram spanning mean +- 5 std; out-of-range
/// samples clamp to the edge bins, both distributions get 1e-10 additive
/// smoothing and renormalization.
std::pair<double, double> kl_divergences(std::span<const float> samples);

/// Feature matrix export: a header row naming all 26 features (h_/v_
/// prefixed) after a leading time_index column, then one row per snapshot.
struct FeatureRow {
    std::int64_t time_index;
    TimeFeatures horizontal;
    TimeFeatures vertical;
};
void write_feature_matrix_csv(std::ostream& out, std::span<const FeatureRow> rows);

namespace detail {

inline constexpr int kKlBins = 100;
inline constexpr double kKlHalfWidthSigmas = 5.0;
inline constexpr double kKlSmoothing = 1e-10;

/// KL between two already-built histograms after smoothing+renormalization.
double kl_between(std::span<const double> p, std::span<const double> q);

} // namespace detail

} // namespace bearing::features
