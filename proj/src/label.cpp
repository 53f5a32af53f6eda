#include "bearing/label.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "bearing/dsp.hpp"
#include "bearing/error.hpp"
#include "bearing/rng.hpp"

namespace bearing::label {

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

struct LloydOutcome {
    std::vector<int> assignments;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_history;
};

std::vector<std::vector<double>> seed_plus_plus(const std::vector<std::vector<double>>& points,
                                                int k, Rng& rng) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> centers;
    centers.reserve(static_cast<std::size_t>(k));
    centers.push_back(points[rng.index(n)]);

    std::vector<double> best_d2(n);
    for (std::size_t i = 0; i < n; ++i) best_d2[i] = sq_distance(points[i], centers[0]);

    while (centers.size() < static_cast<std::size_t>(k)) {
        double total = std::accumulate(best_d2.begin(), best_d2.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double cum = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cum += best_d2[i];
                if (r < cum) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.index(n);
        }
        centers.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i)
            best_d2[i] = std::min(best_d2[i], sq_distance(points[i], centers.back()));
    }
    return centers;
}

void assign_nearest(const std::vector<std::vector<double>>& points,
                    const std::vector<std::vector<double>>& centers, std::vector<int>& out,
                    double* inertia) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::max();
        int best_k = 0;
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const double d = sq_distance(points[i], centers[c]);
            if (d < best) {
                best = d;
                best_k = static_cast<int>(c);
            }
        }
        out[i] = best_k;
        total += best;
    }
    if (inertia) *inertia = total;
}

LloydOutcome lloyd(const std::vector<std::vector<double>>& points, int k,
                   const KMeansConfig& config, Rng& rng) {
    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();

    LloydOutcome out;
    out.centroids = seed_plus_plus(points, k, rng);
    out.assignments.assign(n, 0);

    for (int iter = 0; iter < config.max_iter; ++iter) {
        double inertia = 0.0;
        assign_nearest(points, out.centroids, out.assignments, &inertia);
        out.inertia_history.push_back(inertia);
        out.iterations = iter + 1;

        std::vector<std::vector<double>> next(static_cast<std::size_t>(k),
                                              std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(out.assignments[i]);
            for (std::size_t d = 0; d < dim; ++d) next[c][d] += points[i][d];
            ++counts[c];
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (counts[c] == 0) {
                // Re-seed an emptied cluster at the point farthest from its
                // current centroid; deterministic (first index wins ties).
                double far_d = -1.0;
                std::size_t far_i = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_distance(
                        points[i], out.centroids[static_cast<std::size_t>(out.assignments[i])]);
                    if (d > far_d) {
                        far_d = d;
                        far_i = i;
                    }
                }
                next[c] = points[far_i];
                counts[c] = 1;
            } else {
                for (std::size_t d = 0; d < dim; ++d)
                    next[c][d] /= static_cast<double>(counts[c]);
            }
        }

        double shift = 0.0;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
            shift = std::max(shift, std::sqrt(sq_distance(next[c], out.centroids[c])));
        out.centroids = std::move(next);
        if (shift < config.tol) break;
    }

    // Final assignment so the nearest-centroid invariant holds for the
    // returned centroids exactly.
    assign_nearest(points, out.centroids, out.assignments, &out.inertia);
    return out;
}

// Map cluster ids to stages ordered by ascending mean time index.
std::vector<StageLabel> order_clusters_by_time(const std::vector<int>& assignments,
                                               const std::vector<std::int64_t>& time_indices,
                                               int k, int first_stage_offset = 0) {
    std::vector<double> mean_time(static_cast<std::size_t>(k), 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        mean_time[static_cast<std::size_t>(assignments[i])] +=
            static_cast<double>(time_indices[i]);
        ++counts[static_cast<std::size_t>(assignments[i])];
    }
    for (std::size_t c = 0; c < mean_time.size(); ++c)
        if (counts[c] > 0) mean_time[c] /= static_cast<double>(counts[c]);

    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return mean_time[static_cast<std::size_t>(a)] <
                                                mean_time[static_cast<std::size_t>(b)]; });

    std::vector<StageLabel> cluster_stage(static_cast<std::size_t>(k));
    for (int rank = 0; rank < k; ++rank)
        cluster_stage[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])] =
            stage_from_index(rank + first_stage_offset);
    return cluster_stage;
}

std::vector<dsp::Spectrum> channel_spectra(const BearingRun& run, Channel channel, int factor) {
    std::vector<dsp::Spectrum> spectra;
    spectra.reserve(run.size());
    for (const auto& snap : run.snapshots) {
        const VibrationSnapshot dec = dsp::decimate(snap, factor);
        spectra.push_back(dsp::magnitude_spectrum(dec.channel(channel), dec.sample_rate, channel));
    }
    return spectra;
}

} // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    const KMeansConfig& config) {
    if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
    if (points.size() < static_cast<std::size_t>(k))
        throw Error(Errc::degenerate_points, std::to_string(points.size()) + " points for k=" +
                                                 std::to_string(k));
    for (const auto& p : points)
        if (p.size() != points.front().size())
            throw Error(Errc::shape_mismatch, "points have mixed dimensionality");

    std::set<std::vector<double>> distinct(points.begin(), points.end());
    if (distinct.size() < static_cast<std::size_t>(k))
        throw Error(Errc::degenerate_points,
                    std::to_string(distinct.size()) + " distinct points for k=" +
                        std::to_string(k));

    Rng rng(config.seed);
    KMeansResult best;
    bool have_best = false;
    for (int r = 0; r < std::max(1, config.restarts); ++r) {
        LloydOutcome run = lloyd(points, k, config, rng);
        if (!have_best || run.inertia < best.inertia) {
            best.assignments = std::move(run.assignments);
            best.centroids = std::move(run.centroids);
            best.inertia = run.inertia;
            best.iterations = run.iterations;
            best.inertia_history = std::move(run.inertia_history);
            have_best = true;
        }
    }
    return best;
}

std::vector<bool> detect_stage3(const embed::EmbeddingModel& model, const BearingRun& run,
                                Channel channel) {
    if (!model.trained) throw Error(Errc::model_not_trained, "residual stats not populated");
    if (run.snapshots.empty()) throw Error(Errc::no_snapshots, "empty run");

    // Infer the decimation factor that maps snapshot length onto the model's
    // spectrum size: bins = N/factor/2 + 1.
    const std::size_t needed_n = 2 * (model.input_bins() - 1);
    const std::size_t raw_n = run.snapshots.front().length();
    if (needed_n == 0 || raw_n % needed_n != 0)
        throw Error(Errc::shape_mismatch,
                    "run snapshot length " + std::to_string(raw_n) +
                        " incompatible with model bins " + std::to_string(model.input_bins()));
    const int factor = static_cast<int>(raw_n / needed_n);

    const double threshold = model.residual_mean + 3.0 * model.residual_std;
    std::vector<bool> flags(run.size(), false);
    for (std::size_t i = 0; i < run.size(); ++i) {
        const VibrationSnapshot dec = dsp::decimate(run.snapshots[i], factor);
        const auto spec = dsp::magnitude_spectrum(dec.channel(channel), dec.sample_rate, channel);
        flags[i] = embed::reconstruction_residual(model, spec) > threshold;
    }
    return flags;
}

AeLabeling label_run_ae(const BearingRun& run, const LabelConfig& config) {
    if (run.snapshots.empty()) throw Error(Errc::no_snapshots, "empty run");
    if (config.holdout_fraction < 0.0 || config.holdout_fraction >= 1.0)
        throw Error(Errc::invalid_config, "holdout fraction outside [0, 1)");

    const auto spectra_h = channel_spectra(run, Channel::horizontal, config.downsample_factor);
    const auto spectra_v = channel_spectra(run, Channel::vertical, config.downsample_factor);

    const std::size_t total = run.size();
    const std::size_t train_count =
        config.assume_stage3
            ? static_cast<std::size_t>(std::floor((1.0 - config.holdout_fraction) *
                                                  static_cast<double>(total)))
            : total;
    if (train_count < 1) throw Error(Errc::too_few_spectra, "empty training window");

    embed::AeConfig ae_h = config.ae;
    embed::AeConfig ae_v = config.ae;
    ae_h.seed = config.seed + 1;
    ae_v.seed = config.seed + 2;

    AeLabeling out;
    {
        std::vector<dsp::Spectrum> train_h(spectra_h.begin(),
                                           spectra_h.begin() + static_cast<std::ptrdiff_t>(train_count));
        std::vector<dsp::Spectrum> train_v(spectra_v.begin(),
                                           spectra_v.begin() + static_cast<std::ptrdiff_t>(train_count));
        out.model_horizontal = embed::fit_autoencoder(train_h, ae_h).model;
        out.model_vertical = embed::fit_autoencoder(train_v, ae_v).model;
    }

    // Concatenated per-channel latents for every snapshot.
    std::vector<std::vector<double>> latents(total);
    for (std::size_t i = 0; i < total; ++i) {
        auto lh = embed::encode(out.model_horizontal, spectra_h[i]);
        auto lv = embed::encode(out.model_vertical, spectra_v[i]);
        lh.insert(lh.end(), lv.begin(), lv.end());
        latents[i] = std::move(lh);
    }

    // Stage-3 flags from horizontal residuals over the whole lifetime.
    out.stage3_flags.assign(total, false);
    if (config.assume_stage3) {
        const double threshold =
            out.model_horizontal.residual_mean + 3.0 * out.model_horizontal.residual_std;
        for (std::size_t i = 0; i < total; ++i)
            out.stage3_flags[i] =
                embed::reconstruction_residual(out.model_horizontal, spectra_h[i]) > threshold;
    }

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < total; ++i)
        if (!out.stage3_flags[i]) keep.push_back(i);

    const int k = config.assume_stage3 ? 3 : 4;
    std::vector<std::vector<double>> points;
    std::vector<std::int64_t> times;
    points.reserve(keep.size());
    for (std::size_t i : keep) {
        points.push_back(latents[i]);
        times.push_back(run.snapshots[i].time_index);
    }

    KMeansConfig km = config.kmeans;
    km.seed = config.seed + 3;
    out.clustering = kmeans(points, k, km);
    const auto cluster_stage = order_clusters_by_time(out.clustering.assignments, times, k);

    out.labeled.bearing_id = run.bearing_id;
    out.labeled.run_length = total;
    out.labeled.method = LabelMethod::ae;
    out.labeled.labels.assign(total, StageLabel::stage3);
    out.labeled.time_indices.resize(total);
    for (std::size_t i = 0; i < total; ++i)
        out.labeled.time_indices[i] = run.snapshots[i].time_index;
    for (std::size_t j = 0; j < keep.size(); ++j)
        out.labeled.labels[keep[j]] =
            cluster_stage[static_cast<std::size_t>(out.clustering.assignments[j])];
    return out;
}

PcaLabeling label_run_pca(const BearingRun& run, const LabelConfig& config) {
    if (run.snapshots.empty()) throw Error(Errc::no_snapshots, "empty run");

    const auto spectra_h = channel_spectra(run, Channel::horizontal, config.downsample_factor);
    const auto spectra_v = channel_spectra(run, Channel::vertical, config.downsample_factor);

    PcaLabeling out;
    out.model_horizontal = embed::fit_pca(spectra_h, config.pca_components);
    out.model_vertical = embed::fit_pca(spectra_v, config.pca_components);

    const std::size_t total = run.size();
    std::vector<std::vector<double>> points(total);
    std::vector<std::int64_t> times(total);
    for (std::size_t i = 0; i < total; ++i) {
        auto ph = embed::project_pca(out.model_horizontal, spectra_h[i]);
        auto pv = embed::project_pca(out.model_vertical, spectra_v[i]);
        ph.insert(ph.end(), pv.begin(), pv.end());
        points[i] = std::move(ph);
        times[i] = run.snapshots[i].time_index;
    }

    KMeansConfig km = config.kmeans;
    km.seed = config.seed + 3;
    out.clustering = kmeans(points, 4, km);
    const auto cluster_stage = order_clusters_by_time(out.clustering.assignments, times, 4);

    out.labeled.bearing_id = run.bearing_id;
    out.labeled.run_length = total;
    out.labeled.method = LabelMethod::pca;
    out.labeled.labels.resize(total);
    out.labeled.time_indices = times;
    for (std::size_t i = 0; i < total; ++i)
        out.labeled.labels[i] =
            cluster_stage[static_cast<std::size_t>(out.clustering.assignments[i])];
    return out;
}

StageAccuracy label_agreement(const LabeledRun& labels, const LabeledRun& reference) {
    if (labels.labels.size() != reference.labels.size())
        throw Error(Errc::length_mismatch, "label sequences differ in length");

    StageAccuracy acc;
    std::array<std::size_t, kStageCount> ref_count{};
    std::array<std::size_t, kStageCount> match_count{};
    std::size_t matches = 0;
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        const int r = stage_index(reference.labels[i]);
        ++ref_count[static_cast<std::size_t>(r)];
        if (labels.labels[i] == reference.labels[i]) {
            ++match_count[static_cast<std::size_t>(r)];
            ++matches;
        }
    }
    for (std::size_t s = 0; s < kStageCount; ++s)
        if (ref_count[s] > 0)
            acc.per_stage[s] =
                static_cast<double>(match_count[s]) / static_cast<double>(ref_count[s]);
    acc.overall = labels.labels.empty()
                      ? 0.0
                      : static_cast<double>(matches) / static_cast<double>(labels.labels.size());
    return acc;
}

void save_labels_csv(const LabeledRun& labeled, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << "time_index,stage,method\n";
    for (std::size_t i = 0; i < labeled.labels.size(); ++i)
        out << labeled.time_index_at(i) << "," << stage_index(labeled.labels[i]) << ","
            << label_method_name(labeled.method) << "\n";
}

LabeledRun load_labels_csv(const std::filesystem::path& path, const std::string& bearing_id) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());

    LabeledRun out;
    if (bearing_id.empty()) {
        // Bearing id = filename up to the first dot ("b1.labels.csv" -> "b1").
        std::string stem = path.filename().string();
        const auto dot = stem.find('.');
        if (dot != std::string::npos) stem.resize(dot);
        out.bearing_id = stem;
    } else {
        out.bearing_id = bearing_id;
    }

    std::string line;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("time_index", 0) == 0) continue;  // header
        }
        std::istringstream row(line);
        std::string time_field, stage_field, method_field;
        if (!std::getline(row, time_field, ',') || !std::getline(row, stage_field, ','))
            throw Error(Errc::malformed_row, path.string() + " line " + std::to_string(line_no));
        std::getline(row, method_field, ',');
        try {
            out.time_indices.push_back(std::stoll(time_field));
            out.labels.push_back(stage_from_index(std::stoi(stage_field)));
        } catch (const Error&) {
            throw;
        } catch (...) {
            throw Error(Errc::malformed_row, path.string() + " line " + std::to_string(line_no));
        }
        if (!method_field.empty()) {
            if (auto m = label_method_from_name(method_field)) out.method = *m;
        }
    }
    if (out.labels.empty()) throw Error(Errc::empty_file, path.string());
    out.run_length = out.labels.size();
    return out;
}

} // namespace bearing::label
