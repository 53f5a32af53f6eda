#include "bearing/embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bearing/error.hpp"

namespace bearing::embed {

namespace {

constexpr std::size_t kMinSpectra = 50;

void check_uniform_length(const std::vector<dsp::Spectrum>& spectra) {
    for (const auto& s : spectra)
        if (s.size() != spectra.front().size())
            throw Error(Errc::shape_mismatch, "spectra lengths differ");
}

std::vector<double> standardize(const EmbeddingModel& model, const dsp::Spectrum& spectrum) {
    if (spectrum.size() != model.input_bins())
        throw Error(Errc::shape_mismatch, "spectrum has " + std::to_string(spectrum.size()) +
                                              " bins, model expects " +
                                              std::to_string(model.input_bins()));
    std::vector<double> z(spectrum.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = (spectrum.bins[i] - model.bin_mean[i]) / model.bin_std[i];
    return z;
}

// Forward through encoder+decoder; returns MAE against the standardized input.
double reconstruct_mae(const EmbeddingModel& model, const std::vector<double>& z,
                       nn::Workspace& enc_ws, nn::Workspace& dec_ws) {
    const auto& latent = nn::forward(model.encoder, z, enc_ws);
    const auto& recon = nn::forward(model.decoder, latent, dec_ws);
    double mae = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) mae += std::fabs(recon[i] - z[i]);
    return mae / static_cast<double>(z.size());
}

} // namespace

AeFitResult fit_autoencoder(const std::vector<dsp::Spectrum>& spectra, const AeConfig& config) {
    if (spectra.size() < kMinSpectra)
        throw Error(Errc::too_few_spectra, std::to_string(spectra.size()) + " spectra, need >= " +
                                               std::to_string(kMinSpectra));
    check_uniform_length(spectra);
    if (config.batch < 1 || config.epochs < 0 || config.learning_rate <= 0.0)
        throw Error(Errc::invalid_config, "bad autoencoder config");

    const std::size_t bins = spectra.front().size();
    const std::size_t count = spectra.size();

    AeFitResult result;
    EmbeddingModel& model = result.model;
    model.seed = config.seed;
    model.latent_dim = kLatentDim;

    // Per-bin standardization stats from the provided (training) spectra.
    model.bin_mean.assign(bins, 0.0);
    model.bin_std.assign(bins, 0.0);
    for (const auto& s : spectra)
        for (std::size_t i = 0; i < bins; ++i) model.bin_mean[i] += s.bins[i];
    for (double& v : model.bin_mean) v /= static_cast<double>(count);
    for (const auto& s : spectra)
        for (std::size_t i = 0; i < bins; ++i) {
            const double d = s.bins[i] - model.bin_mean[i];
            model.bin_std[i] += d * d;
        }
    for (double& v : model.bin_std)
        v = std::max(std::sqrt(v / static_cast<double>(count)), kBinStdFloor);

    Rng rng(config.seed);
    const std::size_t latent = static_cast<std::size_t>(kLatentDim);
    model.encoder = nn::make_mlp({bins, 256, 64, latent}, {true, true, false}, rng);
    model.decoder = nn::make_mlp({latent, 64, 256, bins}, {true, true, false}, rng);

    std::vector<std::vector<double>> z(count);
    for (std::size_t i = 0; i < count; ++i) z[i] = standardize(model, spectra[i]);

    nn::Adam opt_enc, opt_dec;
    opt_enc.learning_rate = config.learning_rate;
    opt_dec.learning_rate = config.learning_rate;
    opt_enc.attach(model.encoder);
    opt_dec.attach(model.decoder);

    nn::Grads genc, gdec;
    genc.match(model.encoder);
    gdec.match(model.decoder);

    nn::Workspace enc_ws, dec_ws;
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);

    result.epoch_mae.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < count; start += static_cast<std::size_t>(config.batch)) {
            const std::size_t end = std::min(count, start + static_cast<std::size_t>(config.batch));
            genc.zero();
            gdec.zero();
            for (std::size_t bi = start; bi < end; ++bi) {
                const std::vector<double>& x = z[order[bi]];
                const auto& latent_out = nn::forward(model.encoder, x, enc_ws);
                const auto& recon = nn::forward(model.decoder, latent_out, dec_ws);

                // d(MAE)/d(recon); the subgradient at zero residual is zero.
                std::vector<double> dloss(bins, 0.0);
                double mae = 0.0;
                for (std::size_t i = 0; i < bins; ++i) {
                    const double r = recon[i] - x[i];
                    mae += std::fabs(r);
                    dloss[i] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
                    dloss[i] /= static_cast<double>(bins);
                }
                epoch_loss += mae / static_cast<double>(bins);

                auto dlatent = nn::backward(model.decoder, dec_ws, dloss, gdec);
                nn::backward(model.encoder, enc_ws, dlatent, genc);
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            genc.scale(inv);
            gdec.scale(inv);
            opt_enc.step(model.encoder, genc);
            opt_dec.step(model.decoder, gdec);
        }
        result.epoch_mae.push_back(epoch_loss / static_cast<double>(count));
    }

    if (!result.epoch_mae.empty() && !std::isfinite(result.epoch_mae.back()))
        throw Error(Errc::diverged_loss, "final training MAE is not finite");

    // Residual statistics over the training spectra with the final weights.
    double rsum = 0.0, rsq = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double r = reconstruct_mae(model, z[i], enc_ws, dec_ws);
        rsum += r;
        rsq += r * r;
    }
    model.residual_mean = rsum / static_cast<double>(count);
    model.residual_std =
        std::sqrt(std::max(0.0, rsq / static_cast<double>(count) -
                                    model.residual_mean * model.residual_mean));
    model.trained = true;
    return result;
}

std::vector<double> encode(const EmbeddingModel& model, const dsp::Spectrum& spectrum) {
    nn::Workspace ws;
    const auto z = standardize(model, spectrum);
    return nn::forward(model.encoder, z, ws);
}

double reconstruction_residual(const EmbeddingModel& model, const dsp::Spectrum& spectrum) {
    nn::Workspace enc_ws, dec_ws;
    const auto z = standardize(model, spectrum);
    return reconstruct_mae(model, z, enc_ws, dec_ws);
}

PCAModel fit_pca(const std::vector<dsp::Spectrum>& spectra, int n_components) {
    if (n_components < 1) throw Error(Errc::invalid_argument, "n_components must be >= 1");
    if (spectra.size() < static_cast<std::size_t>(n_components) + 1)
        throw Error(Errc::too_few_spectra,
                    std::to_string(spectra.size()) + " spectra for " +
                        std::to_string(n_components) + " components");
    check_uniform_length(spectra);
    const std::size_t bins = spectra.front().size();
    if (bins < static_cast<std::size_t>(n_components))
        throw Error(Errc::shape_mismatch, "more components than spectrum bins");

    PCAModel model;
    model.bin_mean.assign(bins, 0.0);
    for (const auto& s : spectra)
        for (std::size_t i = 0; i < bins; ++i) model.bin_mean[i] += s.bins[i];
    for (double& v : model.bin_mean) v /= static_cast<double>(spectra.size());

    Matrix cov(bins, bins);
    std::vector<double> centered(bins);
    for (const auto& s : spectra) {
        for (std::size_t i = 0; i < bins; ++i) centered[i] = s.bins[i] - model.bin_mean[i];
        for (std::size_t r = 0; r < bins; ++r) {
            const double cr = centered[r];
            double* row = cov.row(r);
            for (std::size_t c = r; c < bins; ++c) row[c] += cr * centered[c];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(spectra.size());
    for (std::size_t r = 0; r < bins; ++r)
        for (std::size_t c = r; c < bins; ++c) {
            cov(r, c) *= inv_n;
            cov(c, r) = cov(r, c);
        }

    EigenResult eig = symmetric_eigen(cov);
    double total = 0.0;
    for (double v : eig.values) total += std::max(v, 0.0);

    model.components = Matrix(static_cast<std::size_t>(n_components), bins);
    model.explained_variance_ratio.resize(static_cast<std::size_t>(n_components));
    for (std::size_t k = 0; k < static_cast<std::size_t>(n_components); ++k) {
        const double* src = eig.vectors.row(k);
        double sign = 1.0;
        for (std::size_t i = 0; i < bins; ++i) {
            if (src[i] != 0.0) {
                sign = src[i] > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        double* dst = model.components.row(k);
        for (std::size_t i = 0; i < bins; ++i) dst[i] = sign * src[i];
        model.explained_variance_ratio[k] =
            total > 0.0 ? std::max(eig.values[k], 0.0) / total : 0.0;
    }
    return model;
}

std::vector<double> project_pca(const PCAModel& model, const dsp::Spectrum& spectrum) {
    const std::size_t bins = model.components.cols;
    if (spectrum.size() != bins)
        throw Error(Errc::shape_mismatch, "spectrum has " + std::to_string(spectrum.size()) +
                                              " bins, model expects " + std::to_string(bins));
    std::vector<double> out(model.components.rows, 0.0);
    std::vector<double> centered(bins);
    for (std::size_t i = 0; i < bins; ++i) centered[i] = spectrum.bins[i] - model.bin_mean[i];
    for (std::size_t k = 0; k < model.components.rows; ++k) {
        const double* row = model.components.row(k);
        double acc = 0.0;
        for (std::size_t i = 0; i < bins; ++i) acc += row[i] * centered[i];
        out[k] = acc;
    }
    return out;
}

} // namespace bearing::embed
