#include "bearing/eval.hpp"

#include <cstdio>
#include <fstream>

#include "bearing/dsp.hpp"
#include "bearing/error.hpp"

namespace bearing::eval {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    return out;
}

} // namespace

std::array<std::optional<double>, kStageCount> stage_overlap(std::span<const StageLabel> stages) {
    if (stages.empty()) throw Error(Errc::invalid_argument, "empty stage sequence");

    std::array<std::optional<double>, kStageCount> out;
    for (int s = 0; s < kStageCount; ++s) {
        std::ptrdiff_t first = -1, last = -1;
        for (std::size_t i = 0; i < stages.size(); ++i) {
            if (stage_index(stages[i]) == s) {
                if (first < 0) first = static_cast<std::ptrdiff_t>(i);
                last = static_cast<std::ptrdiff_t>(i);
            }
        }
        if (first < 0) continue;
        std::size_t foreign = 0;
        for (std::ptrdiff_t i = first; i <= last; ++i)
            if (stage_index(stages[static_cast<std::size_t>(i)]) != s) ++foreign;
        const double span = static_cast<double>(last - first + 1);
        out[static_cast<std::size_t>(s)] = 100.0 * static_cast<double>(foreign) / span;
    }
    return out;
}

FaultTimingRow fault_timing(std::span<const StageLabel> predicted, const LabeledRun& reference) {
    if (predicted.size() != reference.labels.size())
        throw Error(Errc::length_mismatch, "predicted and reference lengths differ");
    if (predicted.empty()) throw Error(Errc::invalid_argument, "empty sequences");

    FaultTimingRow row;
    row.bearing_id = reference.bearing_id;
    row.total_length = static_cast<long>(predicted.size());

    long fault = -1;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (stage_index(predicted[i]) >= 2) {
            fault = static_cast<long>(i);
            break;
        }
    }
    if (fault < 0) {
        row.detected = false;
        return row;  // flagged no-detection row; percentages undefined, left 0
    }

    row.detected = true;
    row.fault_index = fault;

    const double t_last = static_cast<double>(row.total_length - 1);
    row.pct_lifetime_left_after_fault =
        t_last > 0.0 ? 100.0 * (t_last - static_cast<double>(fault)) / t_last : 0.0;

    std::size_t healthy_total = 0, healthy_after = 0;
    for (std::size_t i = 0; i < reference.labels.size(); ++i) {
        if (stage_index(reference.labels[i]) <= 1) {
            ++healthy_total;
            if (static_cast<long>(i) > fault) ++healthy_after;
        }
    }
    row.pct_healthy_after_fault =
        healthy_total > 0
            ? 100.0 * static_cast<double>(healthy_after) / static_cast<double>(healthy_total)
            : 0.0;

    row.flag_early_late =
        row.pct_lifetime_left_after_fault > 90.0 || row.pct_lifetime_left_after_fault < 10.0;
    return row;
}

DiagnosticSeries compute_diagnostics(const BearingRun& run, int downsample_factor) {
    DiagnosticSeries series;
    series.time_index.reserve(run.size());
    for (const auto& snap : run.snapshots) {
        // Dominant frequency comes from the working (decimated) spectrum;
        // the acceleration extremes come from the raw measurements.
        const VibrationSnapshot dec = dsp::decimate(snap, downsample_factor);
        const auto sh =
            dsp::magnitude_spectrum(dec.horizontal, dec.sample_rate, Channel::horizontal);
        const auto sv = dsp::magnitude_spectrum(dec.vertical, dec.sample_rate, Channel::vertical);
        series.time_index.push_back(snap.time_index);
        series.dominant_freq_h.push_back(dsp::dominant_frequency(sh, /*exclude_dc=*/true));
        series.dominant_freq_v.push_back(dsp::dominant_frequency(sv, /*exclude_dc=*/true));
        series.smooth_max_acc_h.push_back(dsp::smoothed_max_acceleration(snap.horizontal));
        series.smooth_max_acc_v.push_back(dsp::smoothed_max_acceleration(snap.vertical));
    }
    return series;
}

void emit_report(const EvaluationReport& report, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + out_dir.string());

    {
        auto out = open_out(out_dir / "accuracy.csv");
        out << "bearing,stage,accuracy\n";
        for (const auto& b : report.bearings) {
            for (int s = 0; s < kStageCount; ++s)
                if (b.accuracy.per_stage[static_cast<std::size_t>(s)])
                    out << b.bearing_id << "," << stage_name(stage_from_index(s)) << ","
                        << fmt(*b.accuracy.per_stage[static_cast<std::size_t>(s)]) << "\n";
            out << b.bearing_id << ",overall," << fmt(b.accuracy.overall) << "\n";
        }
    }
    {
        auto out = open_out(out_dir / "overlap.csv");
        out << "bearing,stage,overlap_pct\n";
        for (const auto& b : report.bearings)
            for (int s = 0; s < kStageCount; ++s)
                if (b.overlap[static_cast<std::size_t>(s)])
                    out << b.bearing_id << "," << stage_name(stage_from_index(s)) << ","
                        << fmt(*b.overlap[static_cast<std::size_t>(s)]) << "\n";
    }
    {
        auto out = open_out(out_dir / "fault_timing.csv");
        out << "bearing,detected,fault_index,pct_healthy_after_fault,pct_lifetime_left_after_"
               "fault,total_length,flag_early_late\n";
        for (const auto& b : report.bearings) {
            const auto& f = b.fault;
            out << f.bearing_id << "," << (f.detected ? 1 : 0) << "," << f.fault_index << ",";
            if (f.detected)
                out << fmt(f.pct_healthy_after_fault) << ","
                    << fmt(f.pct_lifetime_left_after_fault);
            else
                out << ",";
            out << "," << f.total_length << "," << (f.flag_early_late ? 1 : 0) << "\n";
        }
    }
    for (const auto& b : report.bearings) {
        auto out = open_out(out_dir / ("diagnostics_" + b.bearing_id + ".csv"));
        out << "time_index,dominant_freq_h_hz,dominant_freq_v_hz,smooth_max_acc_h_g,"
               "smooth_max_acc_v_g,stage_pred,stage_ref\n";
        const auto& d = b.diagnostics;
        for (std::size_t i = 0; i < d.time_index.size(); ++i) {
            out << d.time_index[i] << "," << fmt(d.dominant_freq_h[i]) << ","
                << fmt(d.dominant_freq_v[i]) << "," << fmt(d.smooth_max_acc_h[i]) << ","
                << fmt(d.smooth_max_acc_v[i]);
            out << "," << (i < b.predicted.size() ? stage_index(b.predicted[i]) : -1);
            out << "," << (i < b.reference.size() ? stage_index(b.reference[i]) : -1) << "\n";
        }
    }
}

} // namespace bearing::eval
