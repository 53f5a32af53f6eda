#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>

#include "bearing/types.hpp"

namespace bearing::synth {

/// Signature amplitudes at the end of each stage. Within a stage the new
/// component ramps linearly from ramp_start * amplitude up to the full
/// value, then carries over at full strength into later stages.
struct SynthConfig {
    double sample_rate = 25600.0;  // Hz
    int snapshot_len = 2560;       // samples per snapshot (0.1 s)
    std::array<int, 4> snapshots_per_stage = {40, 40, 20, 20};
    double shaft_hz = 30.0;                        // fundamental, persists throughout
    double fault_hz = 120.0;                       // impulse repetition rate in stage 2+
    std::pair<double, double> natural_band = {2000.0, 4000.0};  // Hz
    double noise_sigma = 0.05;      // g, white measurement noise per channel
    double healthy_amp = 1.0;       // g, shaft sine amplitude
    double band_noise_amp = 1.6;    // g RMS, stage-1 natural-band agitation
    double impulse_amp = 6.0;       // g, stage-2 ring peak
    double stage3_rms_mult = 5.5;   // broadband noise RMS as a multiple of healthy RMS
    double ramp_start = 0.6;        // fraction of full amplitude at stage onset
    std::uint64_t seed = 0;

    std::size_t run_length() const {
        return static_cast<std::size_t>(snapshots_per_stage[0] + snapshots_per_stage[1] +
                                        snapshots_per_stage[2] + snapshots_per_stage[3]);
    }
};

void validate_config(const SynthConfig& config);

struct SyntheticRun {
    BearingRun run;
    LabeledRun truth;  // method = synthetic-truth
};

/// Deterministic per seed. Horizontal carries the signature components at
/// full scale, vertical at 0.7; measurement and broadband noise are drawn
/// independently per channel.
SyntheticRun generate_run(const SynthConfig& config, const std::string& bearing_id = "synthetic");

/// Emit the run as a FEMTO-layout directory (acc_XXXXX.csv) plus
/// truth_labels.csv, so synthetic data exercises the real ingestion path.
void write_femto_dataset(const SyntheticRun& synthetic, const std::filesystem::path& out_dir);

} // namespace bearing::synth
