#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "bearing/error.hpp"
#include "bearing/label.hpp"
#include "bearing/rng.hpp"
#include "bearing/synth.hpp"
#include "oracles.hpp"

using namespace bearing;

namespace {

synth::SynthConfig labeling_config() {
    synth::SynthConfig cfg;
    cfg.sample_rate = 5120.0;
    cfg.snapshot_len = 512;
    cfg.snapshots_per_stage = {40, 40, 20, 20};
    cfg.natural_band = {600.0, 1100.0};
    cfg.seed = 42;
    return cfg;
}

label::LabelConfig quick_label_config() {
    label::LabelConfig cfg;
    cfg.downsample_factor = 2;
    cfg.ae.epochs = 150;
    cfg.pca_components = 40;
    cfg.seed = 5;
    return cfg;
}

std::vector<std::vector<double>> random_points(std::size_t n, std::size_t dim, Rng& rng) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (auto& p : pts)
        for (double& v : p) v = rng.uniform(-1.0, 1.0);
    return pts;
}

} // namespace

TEST_CASE("kmeans separates well-spaced blobs exactly") {
    Rng rng(1);
    std::vector<std::vector<double>> points;
    std::vector<int> truth;
    const double centers[3][2] = {{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}};
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 20; ++i) {
            points.push_back({centers[c][0] + 0.1 * rng.normal(),
                              centers[c][1] + 0.1 * rng.normal()});
            truth.push_back(c);
        }

    label::KMeansConfig cfg;
    cfg.seed = 2;
    const auto result = label::kmeans(points, 3, cfg);

    // Partition must match the blob structure (cluster ids may permute).
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < points.size(); ++j)
            CHECK((truth[i] == truth[j]) ==
                  (result.assignments[i] == result.assignments[j]));

    // Every point sits with its nearest centroid.
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = 1e300;
        int best_c = -1;
        for (std::size_t c = 0; c < result.centroids.size(); ++c) {
            double d = 0.0;
            for (std::size_t k = 0; k < 2; ++k) {
                const double diff = points[i][k] - result.centroids[c][k];
                d += diff * diff;
            }
            if (d < best) {
                best = d;
                best_c = static_cast<int>(c);
            }
        }
        CHECK(result.assignments[i] == best_c);
    }
}

TEST_CASE("kmeans with k=1 returns the mean and total scatter") {
    Rng rng(3);
    const auto points = random_points(37, 3, rng);
    label::KMeansConfig cfg;
    cfg.seed = 4;
    const auto result = label::kmeans(points, 1, cfg);

    std::vector<double> mean(3, 0.0);
    for (const auto& p : points)
        for (std::size_t k = 0; k < 3; ++k) mean[k] += p[k] / static_cast<double>(points.size());
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(result.centroids[0][k] == doctest::Approx(mean[k]).epsilon(1e-12));

    double scatter = 0.0;
    for (const auto& p : points)
        for (std::size_t k = 0; k < 3; ++k) scatter += (p[k] - mean[k]) * (p[k] - mean[k]);
    CHECK(result.inertia == doctest::Approx(scatter).epsilon(1e-9));
}

TEST_CASE("kmeans on unit-square corners with k=4 has zero inertia") {
    std::vector<std::vector<double>> corners = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    label::KMeansConfig cfg;
    cfg.seed = 9;
    const auto result = label::kmeans(corners, 4, cfg);
    CHECK(result.inertia == doctest::Approx(0.0));
    std::set<int> ids(result.assignments.begin(), result.assignments.end());
    CHECK(ids.size() == 4);
}

TEST_CASE("kmeans matches the exhaustive optimum on tiny instances") {
    Rng rng(71);
    for (int instance = 0; instance < 12; ++instance) {
        const std::size_t n = 5 + rng.index(4);  // 5..8 points
        const int k = 2 + static_cast<int>(rng.index(2));
        const auto points = random_points(n, 2, rng);
        label::KMeansConfig cfg;
        cfg.seed = 1000 + static_cast<std::uint64_t>(instance);
        cfg.restarts = 16;
        const auto result = label::kmeans(points, k, cfg);
        const double best = oracle::best_inertia_bruteforce(points, k);
        CHECK(result.inertia == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("kmeans inertia never increases across Lloyd iterations") {
    Rng rng(12);
    const auto points = random_points(200, 4, rng);
    label::KMeansConfig cfg;
    cfg.seed = 13;
    const auto result = label::kmeans(points, 3, cfg);
    REQUIRE(result.inertia_history.size() >= 1);
    for (std::size_t i = 1; i < result.inertia_history.size(); ++i)
        CHECK(result.inertia_history[i] <= result.inertia_history[i - 1] + 1e-9);
}

TEST_CASE("kmeans rejects degenerate inputs") {
    std::vector<std::vector<double>> same(10, std::vector<double>{1.0, 2.0});
    label::KMeansConfig cfg;
    try {
        label::kmeans(same, 3, cfg);
        FAIL("expected DegeneratePoints");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::degenerate_points);
    }
}

TEST_CASE("detect_stage3 applies a strict 3-sigma threshold") {
    Rng rng(1);
    embed::EmbeddingModel model;
    model.encoder = nn::make_mlp({129, 256, 64, 8}, {true, true, false}, rng);
    model.decoder = nn::make_mlp({8, 64, 256, 129}, {true, true, false}, rng);
    for (auto& w : model.encoder.weights) std::fill(w.a.begin(), w.a.end(), 0.0);
    for (auto& w : model.decoder.weights) std::fill(w.a.begin(), w.a.end(), 0.0);
    model.bin_mean.assign(129, 0.0);
    model.bin_std.assign(129, 1.0);
    model.residual_mean = 1.0;
    model.residual_std = 0.5;  // threshold = 2.5
    model.trained = true;

    // Zero-weight net reconstructs 0, so the residual equals mean |bin|.
    dsp::Spectrum at_threshold;
    at_threshold.bins.assign(129, 2.5);
    CHECK(embed::reconstruction_residual(model, at_threshold) == doctest::Approx(2.5));

    dsp::Spectrum above;
    above.bins.assign(129, 2.5 + 1e-6);

    // Boundary is excluded (strict inequality), above it flags.
    const double threshold = model.residual_mean + 3.0 * model.residual_std;
    CHECK_FALSE(embed::reconstruction_residual(model, at_threshold) > threshold);
    CHECK(embed::reconstruction_residual(model, above) > threshold);

    embed::EmbeddingModel untrained = model;
    untrained.trained = false;
    synth::SynthConfig scfg = labeling_config();
    const auto synthetic = synth::generate_run(scfg);
    try {
        label::detect_stage3(untrained, synthetic.run);
        FAIL("expected ModelNotTrained");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::model_not_trained);
    }
}

TEST_CASE("ae labeling recovers the synthetic stage structure") {
    const auto synthetic = synth::generate_run(labeling_config());
    const auto result = label::label_run_ae(synthetic.run, quick_label_config());

    const auto acc = label::label_agreement(result.labeled, synthetic.truth);
    CHECK(acc.overall >= 0.85);

    // Stage-3 flags: high recall on true stage 3, low false-flag rate on
    // healthy snapshots.
    std::size_t s3_total = 0, s3_flagged = 0, healthy_total = 0, healthy_flagged = 0;
    for (std::size_t i = 0; i < synthetic.truth.labels.size(); ++i) {
        if (synthetic.truth.labels[i] == StageLabel::stage3) {
            ++s3_total;
            if (result.stage3_flags[i]) ++s3_flagged;
        }
        if (synthetic.truth.labels[i] == StageLabel::healthy) {
            ++healthy_total;
            if (result.stage3_flags[i]) ++healthy_flagged;
        }
    }
    CHECK(static_cast<double>(s3_flagged) >= 0.9 * static_cast<double>(s3_total));
    CHECK(static_cast<double>(healthy_flagged) <= 0.05 * static_cast<double>(healthy_total));

    // Non-flagged snapshots carry exactly three distinct stages.
    std::set<int> values;
    for (std::size_t i = 0; i < result.labeled.labels.size(); ++i)
        if (!result.stage3_flags[i]) values.insert(stage_index(result.labeled.labels[i]));
    CHECK(values.size() == 3);

    // Cluster -> stage mapping is monotone in mean time index.
    std::array<double, 3> mean_time{};
    std::array<std::size_t, 3> counts{};
    for (std::size_t i = 0; i < result.labeled.labels.size(); ++i) {
        if (result.stage3_flags[i]) continue;
        const int s = stage_index(result.labeled.labels[i]);
        mean_time[static_cast<std::size_t>(s)] += static_cast<double>(i);
        ++counts[static_cast<std::size_t>(s)];
    }
    for (int s = 0; s < 3; ++s)
        if (counts[static_cast<std::size_t>(s)] > 0)
            mean_time[static_cast<std::size_t>(s)] /=
                static_cast<double>(counts[static_cast<std::size_t>(s)]);
    CHECK(mean_time[0] < mean_time[1]);
    CHECK(mean_time[1] < mean_time[2]);
}

TEST_CASE("ae labeling is deterministic per seed") {
    const auto synthetic = synth::generate_run(labeling_config());
    auto cfg = quick_label_config();
    cfg.ae.epochs = 40;
    const auto a = label::label_run_ae(synthetic.run, cfg);
    const auto b = label::label_run_ae(synthetic.run, cfg);
    CHECK(a.labeled.labels == b.labeled.labels);
}

TEST_CASE("a run of identical snapshots has no stage structure") {
    auto synthetic = synth::generate_run(labeling_config());
    for (auto& snap : synthetic.run.snapshots) {
        snap.horizontal = synthetic.run.snapshots[0].horizontal;
        snap.vertical = synthetic.run.snapshots[0].vertical;
    }
    auto cfg = quick_label_config();
    cfg.ae.epochs = 5;
    try {
        label::label_run_ae(synthetic.run, cfg);
        FAIL("expected DegeneratePoints");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::degenerate_points);
    }
}

TEST_CASE("pca labeling recovers most of the stage structure") {
    const auto synthetic = synth::generate_run(labeling_config());
    const auto result = label::label_run_pca(synthetic.run, quick_label_config());
    const auto acc = label::label_agreement(result.labeled, synthetic.truth);
    CHECK(acc.overall >= 0.70);

    // 4-means over a constant run is rank-deficient.
    auto constant = synthetic.run;
    for (auto& snap : constant.snapshots) {
        snap.horizontal = constant.snapshots[0].horizontal;
        snap.vertical = constant.snapshots[0].vertical;
    }
    CHECK_THROWS_AS(label::label_run_pca(constant, quick_label_config()), Error);
}

TEST_CASE("label agreement accounting") {
    LabeledRun a{"b", 4, {StageLabel::healthy, StageLabel::stage1, StageLabel::stage2,
                          StageLabel::stage3}, {}, LabelMethod::ae};
    SUBCASE("identical labelings score 1.0 everywhere") {
        const auto acc = label::label_agreement(a, a);
        CHECK(acc.overall == doctest::Approx(1.0));
        for (int s = 0; s < 4; ++s) {
            REQUIRE(acc.per_stage[static_cast<std::size_t>(s)].has_value());
            CHECK(*acc.per_stage[static_cast<std::size_t>(s)] == doctest::Approx(1.0));
        }
    }
    SUBCASE("absent reference stages report as absent") {
        LabeledRun all_healthy{"b", 4, std::vector<StageLabel>(4, StageLabel::healthy), {},
                               LabelMethod::manual};
        LabeledRun all_stage1{"b", 4, std::vector<StageLabel>(4, StageLabel::stage1), {},
                              LabelMethod::ae};
        const auto acc = label::label_agreement(all_stage1, all_healthy);
        REQUIRE(acc.per_stage[0].has_value());
        CHECK(*acc.per_stage[0] == doctest::Approx(0.0));
        CHECK_FALSE(acc.per_stage[1].has_value());
        CHECK_FALSE(acc.per_stage[2].has_value());
        CHECK_FALSE(acc.per_stage[3].has_value());
        CHECK(acc.overall == doctest::Approx(0.0));
    }
    SUBCASE("random labels against a balanced reference sit near 25%") {
        Rng rng(2025);
        const std::size_t n = 40000;
        LabeledRun reference{"b", n, {}, {}, LabelMethod::manual};
        LabeledRun guess{"b", n, {}, {}, LabelMethod::ae};
        for (std::size_t i = 0; i < n; ++i) {
            reference.labels.push_back(stage_from_index(static_cast<int>(i % 4)));
            guess.labels.push_back(stage_from_index(static_cast<int>(rng.index(4))));
        }
        const auto acc = label::label_agreement(guess, reference);
        CHECK(acc.overall == doctest::Approx(0.25).epsilon(0.05));
    }
    SUBCASE("length mismatch") {
        LabeledRun other{"b", 3, {StageLabel::healthy, StageLabel::stage1, StageLabel::stage2},
                         {}, LabelMethod::ae};
        CHECK_THROWS_AS(label::label_agreement(a, other), Error);
    }
}

TEST_CASE("labels round-trip through CSV") {
    const auto dir = std::filesystem::temp_directory_path() / "bearing_test_labels";
    std::filesystem::create_directories(dir);
    LabeledRun labeled{"b3", 5,
                       {StageLabel::healthy, StageLabel::healthy, StageLabel::stage1,
                        StageLabel::stage2, StageLabel::stage3},
                       {1, 2, 3, 5, 6},
                       LabelMethod::pca};
    const auto path = dir / "b3.labels.csv";
    label::save_labels_csv(labeled, path);
    const auto loaded = label::load_labels_csv(path);
    CHECK(loaded.labels == labeled.labels);
    CHECK(loaded.time_indices == labeled.time_indices);
    CHECK(loaded.method == LabelMethod::pca);
    CHECK(loaded.bearing_id == "b3");
}
