#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "bearing/types.hpp"

namespace bearing::dsp {

/// One-sided FFT magnitude spectrum of a single channel.
/// bins[k] = |sum_t x[t] exp(-2*pi*i*k*t/N)| for k = 0..N/2 (no 1/N scaling).
struct Spectrum {
    std::vector<double> bins;  // length N/2 + 1
    double bin_width = 0.0;    // Hz, = sample_rate / N
    Channel channel = Channel::horizontal;

    std::size_t size() const { return bins.size(); }
};

/// Keep every factor-th sample of both channels, starting at index 0.
/// Plain stride decimation, no anti-alias filter; N must divide evenly.
VibrationSnapshot decimate(const VibrationSnapshot& snapshot, int factor);

/// Forward complex DFT of a real signal (mixed-radix Cooley-Tukey, exact
/// O(N^2) fallback on prime factors). Exposed for the Parseval check.
std::vector<std::complex<double>> fft_real(std::span<const float> samples);

Spectrum magnitude_spectrum(std::span<const float> samples, double sample_rate,
                            Channel channel = Channel::horizontal);

/// Frequency of the largest-magnitude bin; ties break toward lower frequency.
double dominant_frequency(const Spectrum& spectrum, bool exclude_dc);

/// Mean of the five largest absolute sample values.
double smoothed_max_acceleration(std::span<const float> samples);

/// Plot-tooling dump: header then one "bin_hz,magnitude" row per bin.
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);

} // namespace bearing::dsp
