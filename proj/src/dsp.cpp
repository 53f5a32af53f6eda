#include "bearing/dsp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <numbers>

#include "bearing/error.hpp"

namespace bearing::dsp {

namespace {

using cdouble = std::complex<double>;

int smallest_prime_factor(int n) {
    for (int p = 2; p * p <= n; ++p)
        if (n % p == 0) return p;
    return n;
}

// Recursive decimation-in-time for composite n = p * m: p sub-transforms of
// the strided subsequences, combined with the n-th roots of unity. A prime n
// falls through to the direct O(n^2) sum, which only happens for the small
// leaf factors of our sizes (2560, 1280, powers of two in tests).
void fft_rec(const cdouble* in, int n, int stride, cdouble* out, const std::vector<cdouble>& roots,
             int root_step) {
    if (n == 1) {
        out[0] = in[0];
        return;
    }
    const int p = smallest_prime_factor(n);
    if (p == n) {
        for (int k = 0; k < n; ++k) {
            cdouble acc(0.0, 0.0);
            for (int t = 0; t < n; ++t)
                acc += in[static_cast<std::size_t>(t) * stride] *
                       roots[(static_cast<std::size_t>(k) * t % n) * root_step];
            out[k] = acc;
        }
        return;
    }
    const int m = n / p;
    std::vector<cdouble> sub(static_cast<std::size_t>(n));
    for (int r = 0; r < p; ++r)
        fft_rec(in + static_cast<std::size_t>(r) * stride, m, stride * p,
                sub.data() + static_cast<std::size_t>(r) * m, roots, root_step * p);
    for (int k = 0; k < n; ++k) {
        cdouble acc(0.0, 0.0);
        const int km = k % m;
        for (int r = 0; r < p; ++r)
            acc += roots[(static_cast<std::size_t>(r) * k % n) * root_step] *
                   sub[static_cast<std::size_t>(r) * m + km];
        out[k] = acc;
    }
}

} // namespace

VibrationSnapshot decimate(const VibrationSnapshot& snapshot, int factor) {
    if (factor < 1) throw Error(Errc::invalid_argument, "decimation factor must be >= 1");
    if (factor == 1) return snapshot;
    const std::size_t n = snapshot.length();
    if (n % static_cast<std::size_t>(factor) != 0)
        throw Error(Errc::indivisible_length, std::to_string(n) + " samples, factor " +
                                                  std::to_string(factor));

    VibrationSnapshot out;
    out.time_index = snapshot.time_index;
    out.sample_rate = snapshot.sample_rate / factor;
    const std::size_t m = n / static_cast<std::size_t>(factor);
    out.horizontal.resize(m);
    out.vertical.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        out.horizontal[i] = snapshot.horizontal[i * factor];
        out.vertical[i] = snapshot.vertical[i * factor];
    }
    return out;
}

std::vector<cdouble> fft_real(std::span<const float> samples) {
    const int n = static_cast<int>(samples.size());
    std::vector<cdouble> in(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) in[i] = cdouble(samples[i], 0.0);

    std::vector<cdouble> roots(samples.size());
    for (int j = 0; j < n; ++j) {
        const double a = -2.0 * std::numbers::pi * j / n;
        roots[static_cast<std::size_t>(j)] = cdouble(std::cos(a), std::sin(a));
    }
    std::vector<cdouble> out(samples.size());
    fft_rec(in.data(), n, 1, out.data(), roots, 1);
    return out;
}

Spectrum magnitude_spectrum(std::span<const float> samples, double sample_rate, Channel channel) {
    const std::size_t n = samples.size();
    if (n < 2 || n % 2 != 0)
        throw Error(Errc::invalid_argument, "need an even sample count >= 2, got " +
                                                std::to_string(n));
    if (sample_rate <= 0.0) throw Error(Errc::invalid_argument, "sample_rate must be positive");
    for (float s : samples)
        if (!std::isfinite(s)) throw Error(Errc::non_finite_input, "non-finite sample");

    auto dft = fft_real(samples);
    Spectrum spec;
    spec.channel = channel;
    spec.bin_width = sample_rate / static_cast<double>(n);
    spec.bins.resize(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) spec.bins[k] = std::abs(dft[k]);
    return spec;
}

double dominant_frequency(const Spectrum& spectrum, bool exclude_dc) {
    const std::size_t start = exclude_dc ? 1 : 0;
    if (spectrum.bins.size() <= start)
        throw Error(Errc::invalid_argument, "spectrum too short");
    std::size_t best = start;
    for (std::size_t k = start + 1; k < spectrum.bins.size(); ++k)
        if (spectrum.bins[k] > spectrum.bins[best]) best = k;
    return spectrum.bin_width * static_cast<double>(best);
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum) {
    out << "bin_hz,magnitude\n";
    char buf[64];
    for (std::size_t k = 0; k < spectrum.bins.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", spectrum.bin_width * static_cast<double>(k),
                      spectrum.bins[k]);
        out << buf;
    }
}

double smoothed_max_acceleration(std::span<const float> samples) {
    if (samples.size() < 5)
        throw Error(Errc::too_short, "need at least 5 samples, got " +
                                         std::to_string(samples.size()));
    std::array<double, 5> top{};  // smallest first
    for (float s : samples) {
        const double a = std::fabs(static_cast<double>(s));
        if (a > top[0]) {
            top[0] = a;
            for (std::size_t i = 1; i < top.size() && top[i] < top[i - 1]; ++i)
                std::swap(top[i], top[i - 1]);
        }
    }
    return (top[0] + top[1] + top[2] + top[3] + top[4]) / 5.0;
}

} // namespace bearing::dsp
