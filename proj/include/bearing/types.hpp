#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bearing {

/// Discrete degradation stage. Ordering matters: later stages are worse.
enum class StageLabel : int {
    healthy = 0,
    stage1 = 1,
    stage2 = 2,
    stage3 = 3,
};

constexpr int kStageCount = 4;

inline int stage_index(StageLabel s) { return static_cast<int>(s); }
StageLabel stage_from_index(int i);
const char* stage_name(StageLabel s);

enum class Channel { horizontal, vertical };

/// One fixed-duration vibration recording: two accelerometer channels sampled
/// at `sample_rate` for N samples. Samples are stored as 32-bit floats, the
/// same width the binary run container uses on disk.
struct VibrationSnapshot {
    std::int64_t time_index = 0;  // ordinal snapshot number, 10 s apart
    double sample_rate = 0.0;     // Hz
    std::vector<float> horizontal;
    std::vector<float> vertical;

    std::size_t length() const { return horizontal.size(); }
    const std::vector<float>& channel(Channel c) const {
        return c == Channel::horizontal ? horizontal : vertical;
    }
};

struct OperatingCondition {
    double speed_rpm = 0.0;
    double load_n = 0.0;
};

/// Time-ordered run-to-failure record for one bearing.
struct BearingRun {
    std::string bearing_id;
    OperatingCondition condition;
    std::vector<VibrationSnapshot> snapshots;
    std::optional<std::vector<StageLabel>> labels;

    std::size_t size() const { return snapshots.size(); }
};

enum class LabelMethod { ae, pca, manual, synthetic_truth };

const char* label_method_name(LabelMethod m);
std::optional<LabelMethod> label_method_from_name(const std::string& name);

/// Stage labels for one run. The run itself is referenced by id and length
/// rather than copied; callers keep run and labels side by side.
struct LabeledRun {
    std::string bearing_id;
    std::size_t run_length = 0;
    std::vector<StageLabel> labels;
    std::vector<std::int64_t> time_indices;  // parallel to labels; 1..n when empty
    LabelMethod method = LabelMethod::manual;

    std::int64_t time_index_at(std::size_t i) const {
        return time_indices.empty() ? static_cast<std::int64_t>(i) + 1 : time_indices[i];
    }
};

} // namespace bearing
