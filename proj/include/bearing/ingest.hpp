#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bearing/types.hpp"

namespace bearing::ingest {

/// One validation problem found in a run. Problems are report entries, never
/// exceptions; validate_run flags everything it can find.
struct ValidationIssue {
    enum class Kind {
        duplicate_time_index,
        unordered_time_index,
        inconsistent_length,
        channel_length_mismatch,
        constant_signal,
        bad_sample_rate,
        short_snapshot,
        missing_labels,
    };
    Kind kind;
    std::int64_t time_index = -1;
    std::string detail;
};

struct ValidationReport {
    std::size_t snapshot_count = 0;
    std::size_t gap_count = 0;  // informational: holes in the time_index sequence
    std::vector<ValidationIssue> issues;

    bool empty() const { return issues.empty(); }
};

/// Parse one FEMTO acc file: one row per sample, comma-separated, at least
/// six fields (hour, minute, second, microsecond, horizontal g, vertical g).
/// Timestamp fields are parsed but not used for ordering.
VibrationSnapshot parse_snapshot_file(std::istream& text, std::int64_t time_index,
                                      double sample_rate);

/// Serialize a snapshot back to the FEMTO row layout.
void write_snapshot_csv(std::ostream& out, const VibrationSnapshot& snapshot,
                        double seconds_between_snapshots = 10.0);

/// Load every acc_*.csv under dir (or root/bearing_id when dir is the dataset
/// root), ordered by the numeric suffix in the filename. Missing numbers in
/// the sequence become gaps in time_index, not errors.
BearingRun load_run(const std::filesystem::path& directory, const std::string& bearing_id,
                    double sample_rate = 25600.0);

ValidationReport validate_run(const BearingRun& run);

std::string report_to_text(const ValidationReport& report);

/// Columnar binary run container. Layout: magic "BSR1", u32 LE samples per
/// snapshot, f64 LE sample rate, then per snapshot N f32 horizontal samples
/// followed by N f32 vertical samples. Snapshot count is implied by file
/// size; time indices are not stored and reload as 1..M.
void save_run_binary(const BearingRun& run, const std::filesystem::path& path);
BearingRun load_run_binary(const std::filesystem::path& path, const std::string& bearing_id = "");

} // namespace bearing::ingest
