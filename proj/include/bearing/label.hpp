#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "bearing/embed.hpp"
#include "bearing/types.hpp"

namespace bearing::label {

struct KMeansConfig {
    int restarts = 10;
    int max_iter = 300;
    double tol = 1e-4;  // max centroid shift (Euclidean) for convergence
    std::uint64_t seed = 0;
};

struct KMeansResult {
    std::vector<int> assignments;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_history;  // per Lloyd iteration of the winning restart
};

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` by inertia.
/// Deterministic given the seed. Throws DegeneratePoints when fewer than k
/// distinct points exist.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    const KMeansConfig& config);

/// Residual anomaly rule: flag snapshots whose horizontal-channel
/// reconstruction residual exceeds residual_mean + 3 * residual_std
/// (strict). The decimation factor is inferred from the model's input size.
std::vector<bool> detect_stage3(const embed::EmbeddingModel& model, const BearingRun& run,
                                Channel channel = Channel::horizontal);

struct LabelConfig {
    int downsample_factor = 2;
    double holdout_fraction = 0.2;  // tail left out of AE training
    bool assume_stage3 = true;      // run reached failure; use anomaly split + 3-means
    embed::AeConfig ae;             // seed field is overridden per channel
    int pca_components = 40;
    KMeansConfig kmeans;
    std::uint64_t seed = 0;
};

/// label_run_ae artifacts. The per-channel models and flags stay accessible
/// for evaluation; labeled.labels carries the final stages.
struct AeLabeling {
    LabeledRun labeled;
    embed::EmbeddingModel model_horizontal;
    embed::EmbeddingModel model_vertical;
    std::vector<bool> stage3_flags;
    KMeansResult clustering;
};

/// Train one autoencoder per channel on the leading (1 - holdout) fraction
/// of spectra, flag stage 3 from horizontal residuals, 3-means the remaining
/// concatenated latents, and order clusters into stages by mean time index.
AeLabeling label_run_ae(const BearingRun& run, const LabelConfig& config);

struct PcaLabeling {
    LabeledRun labeled;
    embed::PCAModel model_horizontal;
    embed::PCAModel model_vertical;
    KMeansResult clustering;
};

/// PCA baseline: 40 components per channel over all spectra, 4-means on the
/// concatenated projections, stages by mean time index.
PcaLabeling label_run_pca(const BearingRun& run, const LabelConfig& config);

struct StageAccuracy {
    std::array<std::optional<double>, kStageCount> per_stage;  // absent stage -> nullopt
    double overall = 0.0;
};

/// Per-stage accuracy against the reference labeling plus overall match rate.
StageAccuracy label_agreement(const LabeledRun& labels, const LabeledRun& reference);

/// Label file round-trip: CSV with header time_index,stage,method.
void save_labels_csv(const LabeledRun& labeled, const std::filesystem::path& path);
LabeledRun load_labels_csv(const std::filesystem::path& path, const std::string& bearing_id = "");

} // namespace bearing::label
