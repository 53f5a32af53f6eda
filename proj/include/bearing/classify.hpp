#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bearing/nn.hpp"
#include "bearing/types.hpp"

namespace bearing::classify {

inline constexpr std::size_t kTimeFeatureCount = 26;  // 13 per channel

struct DatasetConfig {
    int downsample_factor = 2;
    std::uint64_t seed = 0;
};

/// Pooled training rows: concatenated two-channel spectrum, the 26 time
/// features, and the stage label. Scaling statistics are fitted over the
/// pooled rows; rows are stored unscaled and pre-shuffled.
struct TrainingSet {
    std::size_t spectrum_bins = 0;  // per channel
    std::size_t input_len = 0;      // time-domain samples after decimation
    double sample_rate = 0.0;       // Hz after decimation
    std::vector<std::vector<double>> freq_rows;          // 2 * spectrum_bins each
    std::vector<std::array<double, kTimeFeatureCount>> feature_rows;
    std::vector<int> labels;
    std::vector<double> bin_mean, bin_std;    // per concatenated frequency bin
    std::vector<double> feat_mean, feat_std;  // per time feature
    std::array<std::size_t, kStageCount> class_counts{};
    std::array<double, kStageCount> class_weights{};  // inverse-frequency
    std::vector<std::string> warnings;                // e.g. missing stages

    std::size_t size() const { return labels.size(); }
};

TrainingSet build_training_set(
    const std::vector<std::pair<const BearingRun*, const LabeledRun*>>& labeled_runs,
    const DatasetConfig& config);

struct ClassifierConfig {
    int epochs = 50;
    int batch = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
};

/// Multi-input stage classifier: the frequency branch compresses the
/// concatenated spectra, its features are fused with the scaled time
/// features, and the head emits 4 logits.
struct StageClassifier {
    nn::Mlp freq_branch;  // 2*bins -> 256 -> 64, ReLU
    nn::Mlp fusion;       // 64 + 26 -> 32 -> 4, ReLU then linear logits
    std::vector<double> bin_mean, bin_std;
    std::vector<double> feat_mean, feat_std;
    std::array<double, kStageCount> class_weights{};
    std::vector<std::string> stage_names;
    std::uint64_t seed = 0;
    std::size_t spectrum_bins = 0;
    std::size_t input_len = 0;
    double sample_rate = 0.0;
    int downsample_factor = 2;  // recorded so the CLI can prepare raw runs
};

struct ClassifierFitResult {
    StageClassifier model;
    std::vector<double> epoch_accuracy;  // training accuracy after each epoch
    std::vector<double> epoch_loss;      // mean weighted CE per epoch
};

/// Minimize class-weighted categorical cross-entropy with Adam.
/// Deterministic per seed.
ClassifierFitResult train_classifier(const TrainingSet& dataset, const ClassifierConfig& config);

/// Posterior over the four stages for one snapshot at the model's expected
/// sample rate and length.
std::array<double, kStageCount> predict(const StageClassifier& classifier,
                                        const VibrationSnapshot& snapshot);

struct PosteriorSequence {
    std::vector<std::array<double, kStageCount>> raw;
    std::vector<std::array<double, kStageCount>> smoothed;
    std::vector<StageLabel> stages;  // argmax of smoothed, ties toward lower stage
};

/// Trailing-window mean over raw posteriors; entry i averages indices
/// max(0, i-window+1)..i.
std::vector<std::array<double, kStageCount>> smooth_posteriors(
    const std::vector<std::array<double, kStageCount>>& raw, int window);

/// Argmax with ties resolved toward the lower stage.
StageLabel argmax_stage(const std::array<double, kStageCount>& posterior);

/// Causal smoothing: each posterior is the mean of the (up to) `window` most
/// recent raw predictions, the current one included.
PosteriorSequence predict_smoothed(const StageClassifier& classifier, const BearingRun& run,
                                   int window = 5);

} // namespace bearing::classify
