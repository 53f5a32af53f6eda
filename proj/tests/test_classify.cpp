#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bearing/classify.hpp"
#include "bearing/dsp.hpp"
#include "bearing/error.hpp"
#include "bearing/rng.hpp"
#include "bearing/synth.hpp"

using namespace bearing;

namespace {

synth::SynthConfig small_synth(std::uint64_t seed) {
    synth::SynthConfig cfg;
    cfg.sample_rate = 5120.0;
    cfg.snapshot_len = 512;
    cfg.snapshots_per_stage = {16, 16, 10, 10};
    cfg.natural_band = {600.0, 1100.0};
    cfg.seed = seed;
    return cfg;
}

// Four well-separated Gaussian blobs, injected straight into a TrainingSet.
classify::TrainingSet blob_dataset(std::size_t rows_per_class, std::uint64_t seed) {
    Rng rng(seed);
    classify::TrainingSet ds;
    ds.spectrum_bins = 9;
    ds.input_len = 16;
    ds.sample_rate = 160.0;

    for (int c = 0; c < 4; ++c) {
        for (std::size_t r = 0; r < rows_per_class; ++r) {
            std::vector<double> freq(2 * ds.spectrum_bins);
            for (std::size_t i = 0; i < freq.size(); ++i)
                freq[i] = 3.0 * c + 0.2 * rng.normal();
            std::array<double, classify::kTimeFeatureCount> feats{};
            for (std::size_t i = 0; i < feats.size(); ++i)
                feats[i] = (i % 4 == static_cast<std::size_t>(c) ? 2.0 : -1.0) +
                           0.15 * rng.normal();
            ds.freq_rows.push_back(std::move(freq));
            ds.feature_rows.push_back(feats);
            ds.labels.push_back(c);
            ++ds.class_counts[static_cast<std::size_t>(c)];
        }
    }
    const double n = static_cast<double>(ds.size());
    for (std::size_t s = 0; s < kStageCount; ++s)
        ds.class_weights[s] = n / (4.0 * static_cast<double>(ds.class_counts[s]));

    ds.bin_mean.assign(2 * ds.spectrum_bins, 0.0);
    ds.bin_std.assign(2 * ds.spectrum_bins, 1.0);
    ds.feat_mean.assign(classify::kTimeFeatureCount, 0.0);
    ds.feat_std.assign(classify::kTimeFeatureCount, 1.0);
    return ds;
}

} // namespace

TEST_CASE("build_training_set pools rows and fits scaling") {
    const auto s1 = synth::generate_run(small_synth(1), "a");
    const auto s2 = synth::generate_run(small_synth(2), "b");
    classify::DatasetConfig cfg;
    cfg.seed = 3;
    const auto ds = classify::build_training_set(
        {{&s1.run, &s1.truth}, {&s2.run, &s2.truth}}, cfg);

    CHECK(ds.size() == s1.run.size() + s2.run.size());
    CHECK(ds.spectrum_bins == 129);  // 512 / 2 / 2 + 1
    CHECK(ds.input_len == 256);
    CHECK(ds.sample_rate == doctest::Approx(2560.0));
    CHECK(ds.freq_rows.front().size() == 2 * ds.spectrum_bins);
    CHECK(ds.warnings.empty());

    // Inverse-frequency weights: healthy has 16/52 of rows per run, stage2 10/52.
    const double ratio = ds.class_weights[2] / ds.class_weights[0];
    CHECK(ratio == doctest::Approx(16.0 / 10.0));

    // Scaling stats describe the pooled rows.
    REQUIRE(ds.bin_mean.size() == 2 * ds.spectrum_bins);
    for (double sd : ds.bin_std) CHECK(sd > 0.0);
}

TEST_CASE("class weights double when a stage is half as frequent") {
    auto ds = blob_dataset(8, 77);
    // Rebuild counts: 8/8/8/4 by dropping half of stage-3 rows.
    classify::TrainingSet trimmed = ds;
    trimmed.freq_rows.clear();
    trimmed.feature_rows.clear();
    trimmed.labels.clear();
    trimmed.class_counts = {0, 0, 0, 0};
    int dropped = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] == 3 && dropped < 4) {
            ++dropped;
            continue;
        }
        trimmed.freq_rows.push_back(ds.freq_rows[i]);
        trimmed.feature_rows.push_back(ds.feature_rows[i]);
        trimmed.labels.push_back(ds.labels[i]);
        ++trimmed.class_counts[static_cast<std::size_t>(ds.labels[i])];
    }
    const double n = static_cast<double>(trimmed.size());
    for (std::size_t s = 0; s < kStageCount; ++s)
        trimmed.class_weights[s] = n / (4.0 * static_cast<double>(trimmed.class_counts[s]));
    CHECK(trimmed.class_weights[3] / trimmed.class_weights[0] == doctest::Approx(2.0));
}

TEST_CASE("missing stages warn instead of failing") {
    auto synthetic = synth::generate_run(small_synth(4), "c");
    // Relabel everything healthy/stage1 only.
    for (auto& l : synthetic.truth.labels)
        l = stage_index(l) < 2 ? l : StageLabel::stage1;
    classify::DatasetConfig cfg;
    const auto ds = classify::build_training_set({{&synthetic.run, &synthetic.truth}}, cfg);
    CHECK(ds.warnings.size() == 2);  // stage2 and stage3 absent
    CHECK(ds.class_weights[2] == 0.0);
    CHECK(ds.class_weights[3] == 0.0);
}

TEST_CASE("separable blobs train to near-perfect accuracy") {
    const auto ds = blob_dataset(24, 11);
    classify::ClassifierConfig cfg;
    cfg.epochs = 50;
    cfg.seed = 6;
    const auto fit = classify::train_classifier(ds, cfg);
    REQUIRE(fit.epoch_accuracy.size() == 50);
    CHECK(fit.epoch_accuracy.back() >= 0.99);

    // Loss decreases over the first five epochs.
    for (std::size_t e = 1; e < 5; ++e) CHECK(fit.epoch_loss[e] <= fit.epoch_loss[e - 1]);
}

TEST_CASE("training is deterministic per seed") {
    const auto ds = blob_dataset(10, 21);
    classify::ClassifierConfig cfg;
    cfg.epochs = 8;
    cfg.seed = 9;
    const auto a = classify::train_classifier(ds, cfg);
    const auto b = classify::train_classifier(ds, cfg);
    for (std::size_t l = 0; l < a.model.fusion.layer_count(); ++l)
        CHECK(a.model.fusion.weights[l].a == b.model.fusion.weights[l].a);
    CHECK(a.epoch_accuracy == b.epoch_accuracy);
}

TEST_CASE("train_classifier validation") {
    auto ds = blob_dataset(4, 31);
    // Collapse to a single class.
    std::fill(ds.labels.begin(), ds.labels.end(), 0);
    ds.class_counts = {ds.size(), 0, 0, 0};
    classify::ClassifierConfig cfg;
    try {
        classify::train_classifier(ds, cfg);
        FAIL("expected MissingStage");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::missing_stage);
    }
}

TEST_CASE("posteriors are normalized, deterministic, and shape-checked") {
    const auto synthetic = synth::generate_run(small_synth(8), "d");
    classify::DatasetConfig dcfg;
    const auto ds = classify::build_training_set({{&synthetic.run, &synthetic.truth}}, dcfg);
    classify::ClassifierConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 12;
    const auto fit = classify::train_classifier(ds, cfg);

    const auto probe = dsp::decimate(synthetic.run.snapshots[5], 2);
    const auto p1 = classify::predict(fit.model, probe);
    const auto p2 = classify::predict(fit.model, probe);
    CHECK(p1 == p2);
    double sum = 0.0;
    for (double v : p1) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    try {
        classify::predict(fit.model, synthetic.run.snapshots[5]);  // undecimated
        FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::shape_mismatch);
    }
}

TEST_CASE("classifier trained on synthetic truth labels recognizes deep stage 3") {
    const auto train_a = synth::generate_run(small_synth(100), "a");
    const auto train_b = synth::generate_run(small_synth(101), "b");
    classify::DatasetConfig dcfg;
    dcfg.seed = 1;
    const auto ds = classify::build_training_set(
        {{&train_a.run, &train_a.truth}, {&train_b.run, &train_b.truth}}, dcfg);
    classify::ClassifierConfig cfg;
    cfg.epochs = 40;
    cfg.seed = 2;
    const auto fit = classify::train_classifier(ds, cfg);

    const auto held_out = synth::generate_run(small_synth(202), "e");
    const auto last = dsp::decimate(held_out.run.snapshots[held_out.run.size() - 1], 2);
    const auto posterior = classify::predict(fit.model, last);
    CHECK(classify::argmax_stage(posterior) == StageLabel::stage3);
}

TEST_CASE("predict_smoothed depends only on the prefix") {
    const auto synthetic = synth::generate_run(small_synth(60), "p");
    classify::DatasetConfig dcfg;
    const auto ds = classify::build_training_set({{&synthetic.run, &synthetic.truth}}, dcfg);
    classify::ClassifierConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 3;
    const auto fit = classify::train_classifier(ds, cfg);

    BearingRun decimated;
    decimated.bearing_id = "p";
    for (const auto& snap : synthetic.run.snapshots)
        decimated.snapshots.push_back(dsp::decimate(snap, 2));

    const auto full = classify::predict_smoothed(fit.model, decimated, 5);
    BearingRun prefix = decimated;
    prefix.snapshots.resize(10);
    const auto part = classify::predict_smoothed(fit.model, prefix, 5);
    for (std::size_t i = 0; i < part.stages.size(); ++i) {
        CHECK(part.smoothed[i] == full.smoothed[i]);
        CHECK(part.stages[i] == full.stages[i]);
    }
}

TEST_CASE("smoothing rules") {
    using Posterior = std::array<double, kStageCount>;
    SUBCASE("constant posteriors pass through unchanged") {
        const Posterior p = {0.1, 0.2, 0.3, 0.4};
        const std::vector<Posterior> raw(9, p);
        const auto smoothed = classify::smooth_posteriors(raw, 5);
        for (const auto& s : smoothed)
            for (std::size_t c = 0; c < kStageCount; ++c)
                CHECK(s[c] == doctest::Approx(p[c]).epsilon(1e-12));
    }
    SUBCASE("windows shorter than 5 use everything available") {
        std::vector<Posterior> raw;
        raw.push_back({1.0, 0.0, 0.0, 0.0});
        raw.push_back({0.0, 1.0, 0.0, 0.0});
        raw.push_back({0.0, 0.0, 1.0, 0.0});
        const auto smoothed = classify::smooth_posteriors(raw, 5);
        CHECK(smoothed[0][0] == doctest::Approx(1.0));
        CHECK(smoothed[1][0] == doctest::Approx(0.5));
        CHECK(smoothed[1][1] == doctest::Approx(0.5));
        CHECK(smoothed[2][0] == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("alternating one-hot stages tie toward the lower stage") {
        std::vector<Posterior> raw;
        for (int i = 0; i < 8; ++i) {
            Posterior p{};
            p[i % 2 ? 2 : 1] = 1.0;  // alternate stage1 / stage2
            raw.push_back(p);
        }
        const auto smoothed = classify::smooth_posteriors(raw, 4);
        // From index 3 on, the window holds two of each: exact 0.5/0.5 tie.
        for (std::size_t i = 3; i < smoothed.size(); ++i) {
            CHECK(smoothed[i][1] == doctest::Approx(0.5));
            CHECK(smoothed[i][2] == doctest::Approx(0.5));
            CHECK(classify::argmax_stage(smoothed[i]) == StageLabel::stage1);
        }
    }
}
