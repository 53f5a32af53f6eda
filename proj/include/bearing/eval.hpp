#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bearing/label.hpp"
#include "bearing/types.hpp"

namespace bearing::eval {

/// Percent of each predicted stage's span (first to last occurrence,
/// inclusive) occupied by other stages. Absent stages report nullopt.
std::array<std::optional<double>, kStageCount> stage_overlap(std::span<const StageLabel> stages);

/// Fault decision timing. The fault index is the first prediction of
/// stage >= 2; lifetime percentages are computed on the snapshot index grid.
struct FaultTimingRow {
    std::string bearing_id;
    bool detected = false;
    long fault_index = -1;                  // position in the sequence, 0-based
    double pct_healthy_after_fault = 0.0;   // share of reference-healthy life after the fault
    double pct_lifetime_left_after_fault = 0.0;
    long total_length = 0;
    bool flag_early_late = false;  // detection with >90% or <10% of lifetime left
};

FaultTimingRow fault_timing(std::span<const StageLabel> predicted, const LabeledRun& reference);

/// Per-snapshot plot data behind the labeling diagnostics: dominant
/// (non-DC) frequency and smoothed maximum acceleration for both channels.
struct DiagnosticSeries {
    std::vector<std::int64_t> time_index;
    std::vector<double> dominant_freq_h, dominant_freq_v;     // Hz
    std::vector<double> smooth_max_acc_h, smooth_max_acc_v;   // g
};

DiagnosticSeries compute_diagnostics(const BearingRun& run, int downsample_factor);

struct BearingEvaluation {
    std::string bearing_id;
    label::StageAccuracy accuracy;  // predicted vs reference
    std::array<std::optional<double>, kStageCount> overlap;
    FaultTimingRow fault;
    DiagnosticSeries diagnostics;
    std::vector<StageLabel> predicted;
    std::vector<StageLabel> reference;
};

struct EvaluationReport {
    std::vector<BearingEvaluation> bearings;
};

/// Write accuracy.csv, overlap.csv, fault_timing.csv and one
/// diagnostics_<bearing>.csv per bearing. Deterministic bytes; rewriting the
/// same report produces identical files.
void emit_report(const EvaluationReport& report, const std::filesystem::path& out_dir);

} // namespace bearing::eval
