#pragma once

#include <cstdint>
#include <vector>

#include "bearing/dsp.hpp"
#include "bearing/nn.hpp"

namespace bearing::embed {

inline constexpr int kLatentDim = 8;
inline constexpr double kBinStdFloor = 1e-8;

struct AeConfig {
    int epochs = 200;
    int batch = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
};

/// Per-bearing, per-channel spectrum autoencoder. The encoder compresses a
/// standardized one-sided spectrum to an 8-dim latent; the mirrored decoder
/// reconstructs it. Residual statistics over the training spectra drive the
/// stage-3 anomaly rule.
struct EmbeddingModel {
    nn::Mlp encoder;  // L -> 256 -> 64 -> 8, ReLU on hidden, linear latent
    nn::Mlp decoder;  // 8 -> 64 -> 256 -> L, ReLU on hidden, linear output
    std::vector<double> bin_mean;
    std::vector<double> bin_std;
    int latent_dim = kLatentDim;
    double residual_mean = 0.0;
    double residual_std = 0.0;
    std::uint64_t seed = 0;
    bool trained = false;

    std::size_t input_bins() const { return encoder.input_size(); }
};

struct AeFitResult {
    EmbeddingModel model;
    std::vector<double> epoch_mae;  // mean training MAE per epoch
};

/// Train by minimizing mean absolute reconstruction error with Adam on the
/// per-bin standardized spectra. Deterministic for a fixed seed and input
/// order. Needs at least 50 spectra of equal length.
AeFitResult fit_autoencoder(const std::vector<dsp::Spectrum>& spectra, const AeConfig& config);

std::vector<double> encode(const EmbeddingModel& model, const dsp::Spectrum& spectrum);

/// MAE between the standardized spectrum and its reconstruction.
double reconstruction_residual(const EmbeddingModel& model, const dsp::Spectrum& spectrum);

struct PCAModel {
    Matrix components;  // n_components x L, orthonormal rows
    std::vector<double> bin_mean;
    std::vector<double> explained_variance_ratio;  // nonincreasing, in [0,1]
};

/// Top principal components of the centered covariance, eigenvalue order
/// descending, sign fixed so each component's first nonzero entry is
/// positive.
PCAModel fit_pca(const std::vector<dsp::Spectrum>& spectra, int n_components = 40);

std::vector<double> project_pca(const PCAModel& model, const dsp::Spectrum& spectrum);

} // namespace bearing::embed
