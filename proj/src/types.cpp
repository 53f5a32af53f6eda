#include "bearing/types.hpp"

#include "bearing/error.hpp"

namespace bearing {

StageLabel stage_from_index(int i) {
    if (i < 0 || i >= kStageCount)
        throw Error(Errc::invalid_argument, "stage index out of range: " + std::to_string(i));
    return static_cast<StageLabel>(i);
}

const char* stage_name(StageLabel s) {
    switch (s) {
        case StageLabel::healthy: return "healthy";
        case StageLabel::stage1: return "stage1";
        case StageLabel::stage2: return "stage2";
        case StageLabel::stage3: return "stage3";
    }
    return "?";
}

const char* label_method_name(LabelMethod m) {
    switch (m) {
        case LabelMethod::ae: return "ae";
        case LabelMethod::pca: return "pca";
        case LabelMethod::manual: return "manual";
        case LabelMethod::synthetic_truth: return "synthetic-truth";
    }
    return "?";
}

std::optional<LabelMethod> label_method_from_name(const std::string& name) {
    if (name == "ae") return LabelMethod::ae;
    if (name == "pca") return LabelMethod::pca;
    if (name == "manual") return LabelMethod::manual;
    if (name == "synthetic-truth") return LabelMethod::synthetic_truth;
    return std::nullopt;
}

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::malformed_row: return "MalformedRow";
        case Errc::empty_file: return "EmptyFile";
        case Errc::non_finite_sample: return "NonFiniteSample";
        case Errc::no_snapshots: return "NoSnapshots";
        case Errc::inconsistent_length: return "InconsistentLength";
        case Errc::indivisible_length: return "IndivisibleLength";
        case Errc::non_finite_input: return "NonFiniteInput";
        case Errc::too_short: return "TooShort";
        case Errc::degenerate_signal: return "DegenerateSignal";
        case Errc::out_of_range_n: return "OutOfRangeN";
        case Errc::zero_variance: return "ZeroVariance";
        case Errc::too_few_spectra: return "TooFewSpectra";
        case Errc::diverged_loss: return "DivergedLoss";
        case Errc::shape_mismatch: return "ShapeMismatch";
        case Errc::model_not_trained: return "ModelNotTrained";
        case Errc::degenerate_points: return "DegeneratePoints";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::missing_stage: return "MissingStage";
        case Errc::invalid_config: return "InvalidConfig";
        case Errc::io_error: return "IoError";
        case Errc::corrupt_file: return "CorruptFile";
        case Errc::wrong_kind: return "WrongKind";
        case Errc::config_error: return "ConfigError";
        case Errc::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

} // namespace bearing
