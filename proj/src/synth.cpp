#include "bearing/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <vector>

#include "bearing/error.hpp"
#include "bearing/ingest.hpp"
#include "bearing/rng.hpp"

namespace bearing::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kBandTones = 32;
constexpr double kVerticalScale = 0.7;

struct StagePosition {
    StageLabel stage;
    double ramp;  // ramp_start at the first snapshot of a stage, 1.0 at the last
};

StagePosition stage_at(const SynthConfig& cfg, std::size_t snapshot_index) {
    std::size_t offset = snapshot_index;
    for (int s = 0; s < 4; ++s) {
        const std::size_t len = static_cast<std::size_t>(cfg.snapshots_per_stage[s]);
        if (offset < len) {
            const double progress =
                len == 1 ? 1.0
                         : static_cast<double>(offset) / static_cast<double>(len - 1);
            return {static_cast<StageLabel>(s),
                    cfg.ramp_start + (1.0 - cfg.ramp_start) * progress};
        }
        offset -= len;
    }
    throw Error(Errc::invalid_argument, "snapshot index beyond run length");
}

} // namespace

void validate_config(const SynthConfig& cfg) {
    const bool ordered = cfg.shaft_hz > 0.0 && cfg.shaft_hz < cfg.fault_hz &&
                         cfg.fault_hz < cfg.natural_band.first &&
                         cfg.natural_band.first < cfg.natural_band.second &&
                         cfg.natural_band.second < cfg.sample_rate / 2.0;
    if (!ordered)
        throw Error(Errc::invalid_config,
                    "need 0 < shaft_hz < fault_hz < natural_band < sample_rate/2");
    if (cfg.snapshot_len < 8 || cfg.sample_rate <= 0.0)
        throw Error(Errc::invalid_config, "snapshot_len/sample_rate invalid");
    for (int s : cfg.snapshots_per_stage)
        if (s < 1) throw Error(Errc::invalid_config, "each stage needs at least one snapshot");
    if (cfg.noise_sigma < 0.0 || cfg.healthy_amp <= 0.0 || cfg.band_noise_amp < 0.0 ||
        cfg.impulse_amp < 0.0 || cfg.stage3_rms_mult < 1.0 || cfg.ramp_start <= 0.0 ||
        cfg.ramp_start > 1.0)
        throw Error(Errc::invalid_config, "amplitude schedule invalid");
}

SyntheticRun generate_run(const SynthConfig& cfg, const std::string& bearing_id) {
    validate_config(cfg);
    Rng rng(cfg.seed);

    const std::size_t n = static_cast<std::size_t>(cfg.snapshot_len);
    const double dt = 1.0 / cfg.sample_rate;
    const double healthy_rms =
        std::sqrt(0.5 * cfg.healthy_amp * cfg.healthy_amp + cfg.noise_sigma * cfg.noise_sigma);
    const double band_center = 0.5 * (cfg.natural_band.first + cfg.natural_band.second);
    const double ring_decay = band_center / 5.0;  // ~5 oscillations per ring

    SyntheticRun out;
    out.run.bearing_id = bearing_id;
    out.run.condition = {cfg.shaft_hz * 60.0, 4000.0};
    out.truth.bearing_id = bearing_id;
    out.truth.method = LabelMethod::synthetic_truth;

    std::vector<double> shared(n);
    std::vector<double> band_phase(kBandTones);

    const std::size_t total = cfg.run_length();
    for (std::size_t si = 0; si < total; ++si) {
        const StagePosition pos = stage_at(cfg, si);
        const int stage = stage_index(pos.stage);

        // Shared deterministic signature, built once per snapshot.
        for (std::size_t t = 0; t < n; ++t)
            shared[t] = cfg.healthy_amp * std::sin(kTwoPi * cfg.shaft_hz * t * dt);

        if (stage >= 1) {
            // Natural-frequency agitation: random-phase tone bank across the
            // band, scaled to the target RMS. Tones are redrawn per snapshot
            // and shared between channels.
            const double amp = cfg.band_noise_amp * (stage == 1 ? pos.ramp : 1.0);
            const double tone_scale = amp / std::sqrt(static_cast<double>(kBandTones) / 2.0);
            for (int j = 0; j < kBandTones; ++j) band_phase[j] = rng.uniform(0.0, kTwoPi);
            for (std::size_t t = 0; t < n; ++t) {
                double acc = 0.0;
                for (int j = 0; j < kBandTones; ++j) {
                    const double f = cfg.natural_band.first +
                                     (cfg.natural_band.second - cfg.natural_band.first) *
                                         (j + 0.5) / kBandTones;
                    acc += std::sin(kTwoPi * f * t * dt + band_phase[j]);
                }
                shared[t] += tone_scale * acc;
            }
        }

        if (stage >= 2) {
            // Impulse train at the fault rate; each impulse rings at the
            // natural-band center and decays exponentially.
            const double amp = cfg.impulse_amp * (stage == 2 ? pos.ramp : 1.0);
            const double period = 1.0 / cfg.fault_hz;
            for (double t0 = 0.0; t0 < n * dt; t0 += period) {
                const std::size_t start = static_cast<std::size_t>(std::ceil(t0 / dt));
                for (std::size_t t = start; t < n; ++t) {
                    const double tau = t * dt - t0;
                    const double envelope = std::exp(-ring_decay * tau);
                    if (envelope < 1e-4) break;
                    shared[t] += amp * envelope * std::sin(kTwoPi * band_center * tau);
                }
            }
        }

        // Stage 3 jumps straight to full broadband level: failure-grade
        // looseness, not a ramp.
        const double broadband_sigma = stage == 3 ? cfg.stage3_rms_mult * healthy_rms : 0.0;

        VibrationSnapshot snap;
        snap.time_index = static_cast<std::int64_t>(si) + 1;
        snap.sample_rate = cfg.sample_rate;
        snap.horizontal.resize(n);
        snap.vertical.resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            double h = shared[t] + cfg.noise_sigma * rng.normal();
            double v = kVerticalScale * shared[t] + cfg.noise_sigma * rng.normal();
            if (broadband_sigma > 0.0) {
                h += broadband_sigma * rng.normal();
                v += broadband_sigma * rng.normal();
            }
            snap.horizontal[t] = static_cast<float>(h);
            snap.vertical[t] = static_cast<float>(v);
        }
        out.run.snapshots.push_back(std::move(snap));
        out.truth.labels.push_back(pos.stage);
        out.truth.time_indices.push_back(static_cast<std::int64_t>(si) + 1);
    }

    out.truth.run_length = out.run.snapshots.size();
    out.run.labels = out.truth.labels;
    return out;
}

void write_femto_dataset(const SyntheticRun& synthetic, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + out_dir.string());

    char name[32];
    for (std::size_t i = 0; i < synthetic.run.snapshots.size(); ++i) {
        std::snprintf(name, sizeof name, "acc_%05zu.csv", i + 1);
        std::ofstream out(out_dir / name, std::ios::trunc);
        if (!out) throw Error(Errc::io_error, "cannot write " + (out_dir / name).string());
        ingest::write_snapshot_csv(out, synthetic.run.snapshots[i]);
    }

    std::ofstream labels(out_dir / "truth_labels.csv", std::ios::trunc);
    if (!labels) throw Error(Errc::io_error, "cannot write truth_labels.csv");
    labels << "time_index,stage,method\n";
    for (std::size_t i = 0; i < synthetic.truth.labels.size(); ++i)
        labels << synthetic.run.snapshots[i].time_index << ","
               << stage_index(synthetic.truth.labels[i]) << ","
               << label_method_name(synthetic.truth.method) << "\n";
}

} // namespace bearing::synth
