#include "bearing/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bearing/dsp.hpp"
#include "bearing/error.hpp"
#include "bearing/features.hpp"
#include "bearing/rng.hpp"

namespace bearing::classify {

namespace {

void fill_feature_row(const VibrationSnapshot& snap, std::array<double, kTimeFeatureCount>& row) {
    const auto fh = features::time_features(snap.horizontal).values();
    const auto fv = features::time_features(snap.vertical).values();
    std::copy(fh.begin(), fh.end(), row.begin());
    std::copy(fv.begin(), fv.end(), row.begin() + fh.size());
}

std::vector<double> concat_spectra(const VibrationSnapshot& snap) {
    const auto sh = dsp::magnitude_spectrum(snap.horizontal, snap.sample_rate, Channel::horizontal);
    const auto sv = dsp::magnitude_spectrum(snap.vertical, snap.sample_rate, Channel::vertical);
    std::vector<double> row;
    row.reserve(sh.size() + sv.size());
    row.insert(row.end(), sh.bins.begin(), sh.bins.end());
    row.insert(row.end(), sv.bins.begin(), sv.bins.end());
    return row;
}

void fit_scaling(const std::vector<std::vector<double>>& rows, std::vector<double>& mean,
                 std::vector<double>& stdev) {
    const std::size_t dim = rows.front().size();
    mean.assign(dim, 0.0);
    stdev.assign(dim, 0.0);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < dim; ++i) mean[i] += r[i];
    for (double& v : mean) v /= static_cast<double>(rows.size());
    for (const auto& r : rows)
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = r[i] - mean[i];
            stdev[i] += d * d;
        }
    for (double& v : stdev)
        v = std::max(std::sqrt(v / static_cast<double>(rows.size())), 1e-8);
}

struct ScaledInput {
    std::vector<double> freq;
    std::vector<double> feats;
};

ScaledInput scale_input(const StageClassifier& model, const std::vector<double>& freq,
                        const std::array<double, kTimeFeatureCount>& feats) {
    ScaledInput s;
    s.freq.resize(freq.size());
    for (std::size_t i = 0; i < freq.size(); ++i)
        s.freq[i] = (freq[i] - model.bin_mean[i]) / model.bin_std[i];
    s.feats.resize(feats.size());
    for (std::size_t i = 0; i < feats.size(); ++i)
        s.feats[i] = (feats[i] - model.feat_mean[i]) / model.feat_std[i];
    return s;
}

std::array<double, kStageCount> forward_posterior(const StageClassifier& model,
                                                  const ScaledInput& in, nn::Workspace& freq_ws,
                                                  nn::Workspace& fusion_ws) {
    const auto& freq_feat = nn::forward(model.freq_branch, in.freq, freq_ws);
    std::vector<double> fused;
    fused.reserve(freq_feat.size() + in.feats.size());
    fused.insert(fused.end(), freq_feat.begin(), freq_feat.end());
    fused.insert(fused.end(), in.feats.begin(), in.feats.end());
    std::vector<double> logits = nn::forward(model.fusion, fused, fusion_ws);
    nn::softmax(logits);
    std::array<double, kStageCount> out{};
    std::copy(logits.begin(), logits.end(), out.begin());
    return out;
}

} // namespace

TrainingSet build_training_set(
    const std::vector<std::pair<const BearingRun*, const LabeledRun*>>& labeled_runs,
    const DatasetConfig& config) {
    if (labeled_runs.empty()) throw Error(Errc::invalid_argument, "no labeled runs");

    TrainingSet ds;
    for (const auto& [run, labeled] : labeled_runs) {
        if (!run || !labeled) throw Error(Errc::invalid_argument, "null run or labels");
        if (run->size() != labeled->labels.size())
            throw Error(Errc::length_mismatch,
                        run->bearing_id + ": " + std::to_string(run->size()) + " snapshots vs " +
                            std::to_string(labeled->labels.size()) + " labels");
        for (std::size_t i = 0; i < run->size(); ++i) {
            const VibrationSnapshot dec =
                dsp::decimate(run->snapshots[i], config.downsample_factor);
            if (ds.spectrum_bins == 0) {
                ds.spectrum_bins = dec.length() / 2 + 1;
                ds.input_len = dec.length();
                ds.sample_rate = dec.sample_rate;
            } else if (dec.length() != ds.input_len) {
                throw Error(Errc::inconsistent_length,
                            run->bearing_id + ": snapshot length differs across runs");
            }
            ds.freq_rows.push_back(concat_spectra(dec));
            ds.feature_rows.emplace_back();
            fill_feature_row(dec, ds.feature_rows.back());
            const int label = stage_index(labeled->labels[i]);
            ds.labels.push_back(label);
            ++ds.class_counts[static_cast<std::size_t>(label)];
        }
    }

    for (std::size_t s = 0; s < kStageCount; ++s)
        if (ds.class_counts[s] == 0)
            ds.warnings.push_back(std::string("MissingStage: no rows labeled ") +
                                  stage_name(stage_from_index(static_cast<int>(s))));

    // Inverse-frequency class weights: n / (kStageCount * count_c).
    const double n_total = static_cast<double>(ds.size());
    for (std::size_t s = 0; s < kStageCount; ++s)
        ds.class_weights[s] =
            ds.class_counts[s] > 0
                ? n_total / (static_cast<double>(kStageCount) *
                             static_cast<double>(ds.class_counts[s]))
                : 0.0;

    fit_scaling(ds.freq_rows, ds.bin_mean, ds.bin_std);
    {
        std::vector<std::vector<double>> feat_rows(ds.feature_rows.size());
        for (std::size_t i = 0; i < ds.feature_rows.size(); ++i)
            feat_rows[i].assign(ds.feature_rows[i].begin(), ds.feature_rows[i].end());
        fit_scaling(feat_rows, ds.feat_mean, ds.feat_std);
    }

    // Deterministic shuffle of the pooled rows.
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed);
    rng.shuffle(order);
    TrainingSet shuffled = ds;
    for (std::size_t i = 0; i < order.size(); ++i) {
        shuffled.freq_rows[i] = std::move(ds.freq_rows[order[i]]);
        shuffled.feature_rows[i] = ds.feature_rows[order[i]];
        shuffled.labels[i] = ds.labels[order[i]];
    }
    return shuffled;
}

ClassifierFitResult train_classifier(const TrainingSet& dataset, const ClassifierConfig& config) {
    if (dataset.size() == 0) throw Error(Errc::invalid_argument, "empty dataset");
    int classes_present = 0;
    for (std::size_t s = 0; s < kStageCount; ++s)
        if (dataset.class_counts[s] > 0) ++classes_present;
    if (classes_present < 2) throw Error(Errc::missing_stage, "need at least 2 classes present");
    if (config.batch < 1 || config.epochs < 0 || config.learning_rate <= 0.0)
        throw Error(Errc::invalid_config, "bad classifier config");

    ClassifierFitResult result;
    StageClassifier& model = result.model;
    model.seed = config.seed;
    model.spectrum_bins = dataset.spectrum_bins;
    model.input_len = dataset.input_len;
    model.sample_rate = dataset.sample_rate;
    model.bin_mean = dataset.bin_mean;
    model.bin_std = dataset.bin_std;
    model.feat_mean = dataset.feat_mean;
    model.feat_std = dataset.feat_std;
    model.class_weights = dataset.class_weights;
    for (int s = 0; s < kStageCount; ++s) model.stage_names.push_back(stage_name(stage_from_index(s)));

    Rng rng(config.seed);
    const std::size_t freq_in = 2 * dataset.spectrum_bins;
    model.freq_branch = nn::make_mlp({freq_in, 256, 64}, {true, true}, rng);
    model.fusion = nn::make_mlp({64 + kTimeFeatureCount, 32, kStageCount}, {true, false}, rng);

    // Standardize once up front.
    const std::size_t count = dataset.size();
    std::vector<ScaledInput> inputs(count);
    for (std::size_t i = 0; i < count; ++i)
        inputs[i] = scale_input(model, dataset.freq_rows[i], dataset.feature_rows[i]);

    nn::Adam opt_freq, opt_fusion;
    opt_freq.learning_rate = config.learning_rate;
    opt_fusion.learning_rate = config.learning_rate;
    opt_freq.attach(model.freq_branch);
    opt_fusion.attach(model.fusion);
    nn::Grads gfreq, gfusion;
    gfreq.match(model.freq_branch);
    gfusion.match(model.fusion);

    nn::Workspace freq_ws, fusion_ws;
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);

    const std::size_t freq_feat_dim = model.freq_branch.output_size();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < count; start += static_cast<std::size_t>(config.batch)) {
            const std::size_t end = std::min(count, start + static_cast<std::size_t>(config.batch));
            gfreq.zero();
            gfusion.zero();
            for (std::size_t bi = start; bi < end; ++bi) {
                const ScaledInput& in = inputs[order[bi]];
                const int y = dataset.labels[order[bi]];
                const double wy = dataset.class_weights[static_cast<std::size_t>(y)];

                const auto& freq_feat = nn::forward(model.freq_branch, in.freq, freq_ws);
                std::vector<double> fused;
                fused.reserve(freq_feat.size() + in.feats.size());
                fused.insert(fused.end(), freq_feat.begin(), freq_feat.end());
                fused.insert(fused.end(), in.feats.begin(), in.feats.end());
                std::vector<double> probs = nn::forward(model.fusion, fused, fusion_ws);
                nn::softmax(probs);

                epoch_loss -= wy * std::log(std::max(probs[static_cast<std::size_t>(y)], 1e-300));

                // d(weighted CE)/d(logits) = w_y * (softmax - onehot).
                std::vector<double> dlogits = probs;
                dlogits[static_cast<std::size_t>(y)] -= 1.0;
                for (double& v : dlogits) v *= wy;

                const auto dfused = nn::backward(model.fusion, fusion_ws, dlogits, gfusion);
                std::span<const double> dfreq(dfused.data(), freq_feat_dim);
                nn::backward(model.freq_branch, freq_ws, dfreq, gfreq);
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            gfreq.scale(inv);
            gfusion.scale(inv);
            opt_freq.step(model.freq_branch, gfreq);
            opt_fusion.step(model.fusion, gfusion);
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(count));

        std::size_t correct = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const auto probs = forward_posterior(model, inputs[i], freq_ws, fusion_ws);
            const int pred = static_cast<int>(
                std::max_element(probs.begin(), probs.end()) - probs.begin());
            if (pred == dataset.labels[i]) ++correct;
        }
        result.epoch_accuracy.push_back(static_cast<double>(correct) /
                                        static_cast<double>(count));
    }

    if (!result.epoch_loss.empty() && !std::isfinite(result.epoch_loss.back()))
        throw Error(Errc::diverged_loss, "final training loss is not finite");
    return result;
}

std::array<double, kStageCount> predict(const StageClassifier& classifier,
                                        const VibrationSnapshot& snapshot) {
    if (snapshot.length() != classifier.input_len)
        throw Error(Errc::shape_mismatch,
                    "snapshot has " + std::to_string(snapshot.length()) + " samples, model expects " +
                        std::to_string(classifier.input_len));
    if (std::fabs(snapshot.sample_rate - classifier.sample_rate) >
        1e-9 * classifier.sample_rate)
        throw Error(Errc::shape_mismatch, "snapshot sample rate differs from model");
    std::array<double, kTimeFeatureCount> feats{};
    fill_feature_row(snapshot, feats);
    const auto freq = concat_spectra(snapshot);
    nn::Workspace freq_ws, fusion_ws;
    return forward_posterior(classifier, scale_input(classifier, freq, feats), freq_ws, fusion_ws);
}

std::vector<std::array<double, kStageCount>> smooth_posteriors(
    const std::vector<std::array<double, kStageCount>>& raw, int window) {
    if (window < 1) throw Error(Errc::invalid_argument, "window must be >= 1");
    std::vector<std::array<double, kStageCount>> smoothed;
    smoothed.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        std::array<double, kStageCount> mean{};
        const std::size_t lo = i + 1 >= static_cast<std::size_t>(window)
                                   ? i + 1 - static_cast<std::size_t>(window)
                                   : 0;
        for (std::size_t j = lo; j <= i; ++j)
            for (std::size_t c = 0; c < kStageCount; ++c) mean[c] += raw[j][c];
        const double inv = 1.0 / static_cast<double>(i - lo + 1);
        for (double& v : mean) v *= inv;
        smoothed.push_back(mean);
    }
    return smoothed;
}

StageLabel argmax_stage(const std::array<double, kStageCount>& posterior) {
    // Strict greater-than scan: ties stay with the lower stage.
    int best = 0;
    for (int c = 1; c < kStageCount; ++c)
        if (posterior[static_cast<std::size_t>(c)] > posterior[static_cast<std::size_t>(best)])
            best = c;
    return stage_from_index(best);
}

PosteriorSequence predict_smoothed(const StageClassifier& classifier, const BearingRun& run,
                                   int window) {
    PosteriorSequence seq;
    seq.raw.reserve(run.size());
    for (std::size_t i = 0; i < run.size(); ++i)
        seq.raw.push_back(predict(classifier, run.snapshots[i]));
    seq.smoothed = smooth_posteriors(seq.raw, window);
    seq.stages.reserve(run.size());
    for (const auto& p : seq.smoothed) seq.stages.push_back(argmax_stage(p));
    return seq;
}

} // namespace bearing::classify
