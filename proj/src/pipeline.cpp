#include "bearing/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "bearing/error.hpp"
#include "bearing/features.hpp"
#include "bearing/model_io.hpp"
#include "bearing/synth.hpp"

namespace fs = std::filesystem;

namespace bearing::pipeline {

namespace {

std::string bearing_id_from_label_file(const fs::path& label_file) {
    std::string stem = label_file.filename().string();
    const auto dot = stem.find('.');
    if (dot != std::string::npos) stem.resize(dot);
    if (stem.empty())
        throw Error(Errc::invalid_argument, "cannot derive bearing id from " + label_file.string());
    return stem;
}

BearingRun load_run_for_bearing(const fs::path& runs_root, const std::string& bearing_id,
                                double sample_rate) {
    const fs::path dir = runs_root / bearing_id;
    if (fs::is_directory(dir)) return ingest::load_run(dir, bearing_id, sample_rate);
    const fs::path bsr = runs_root / (bearing_id + ".bsr");
    if (fs::is_regular_file(bsr)) return ingest::load_run_binary(bsr, bearing_id);
    throw Error(Errc::io_error, "no run found for bearing " + bearing_id + " under " +
                                    runs_root.string());
}

std::string fmt_prob(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Deterministic parallel map: results land by index, worker count bounded by
// jobs; each task must be independent.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(jobs, static_cast<int>(count));
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

BearingRun load_run_any(const fs::path& path, const std::string& bearing_id, double sample_rate) {
    if (fs::is_directory(path)) return ingest::load_run(path, bearing_id, sample_rate);
    if (fs::is_regular_file(path) && path.extension() == ".bsr")
        return ingest::load_run_binary(path, bearing_id);
    throw Error(Errc::io_error, "run path is neither a directory nor a .bsr file: " +
                                    path.string());
}

BearingRun prepare_run_for_model(const BearingRun& run, const classify::StageClassifier& model) {
    if (run.snapshots.empty()) throw Error(Errc::no_snapshots, run.bearing_id);
    const std::size_t raw = run.snapshots.front().length();
    if (raw == model.input_len) return run;
    if (model.input_len == 0 || raw % model.input_len != 0)
        throw Error(Errc::shape_mismatch,
                    "run length " + std::to_string(raw) + " has no integer decimation onto " +
                        std::to_string(model.input_len));
    const int factor = static_cast<int>(raw / model.input_len);
    BearingRun out;
    out.bearing_id = run.bearing_id;
    out.condition = run.condition;
    out.labels = run.labels;
    out.snapshots.reserve(run.size());
    for (const auto& snap : run.snapshots) out.snapshots.push_back(dsp::decimate(snap, factor));
    return out;
}

std::uint64_t hash_run(const BearingRun& run) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& snap : run.snapshots) {
        h = model_io::detail::fnv1a64(
            reinterpret_cast<const std::uint8_t*>(snap.horizontal.data()),
            snap.horizontal.size() * sizeof(float), h);
        h = model_io::detail::fnv1a64(reinterpret_cast<const std::uint8_t*>(snap.vertical.data()),
                                      snap.vertical.size() * sizeof(float), h);
    }
    return h;
}

std::uint64_t hash_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_io::detail::fnv1a64(reinterpret_cast<const std::uint8_t*>(data.data()),
                                     data.size());
}

void write_manifest(const fs::path& artifact, const std::string& command,
                    const config::PipelineConfig& cfg,
                    const std::vector<std::pair<std::string, std::uint64_t>>& inputs) {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["command"] = command;
    j["artifact"] = artifact.filename().string();
    j["config"] = cfg.entries();
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(cfg.content_hash()));
    j["config_hash"] = hex;
    j["seed"] = cfg.seed();
    nlohmann::json in = nlohmann::json::object();
    for (const auto& [name, hash] : inputs) {
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
        in[name] = hex;
    }
    j["inputs"] = std::move(in);

    const fs::path manifest = artifact.string() + ".manifest.json";
    std::ofstream out(manifest, std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + manifest.string());
    out << j.dump(1) << "\n";
}

void export_feature_matrix(const BearingRun& run, int downsample_factor,
                           const fs::path& out_csv) {
    std::vector<features::FeatureRow> rows;
    rows.reserve(run.size());
    for (const auto& snap : run.snapshots) {
        const VibrationSnapshot dec = dsp::decimate(snap, downsample_factor);
        rows.push_back({snap.time_index, features::time_features(dec.horizontal),
                        features::time_features(dec.vertical)});
    }
    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + out_csv.string());
    features::write_feature_matrix_csv(out, rows);
}

ingest::ValidationReport cmd_ingest_check(const fs::path& root, const std::string& bearing_id,
                                          const std::optional<fs::path>& export_bsr,
                                          const std::optional<fs::path>& features_csv,
                                          const config::PipelineConfig& cfg) {
    cfg.validate();
    const BearingRun run = load_run_for_bearing(root, bearing_id,
                                                cfg.get_double("pipeline.sample_rate"));
    const auto report = ingest::validate_run(run);
    if (export_bsr) {
        ingest::save_run_binary(run, *export_bsr);
        write_manifest(*export_bsr, "ingest-check", cfg, {{bearing_id, hash_run(run)}});
    }
    if (features_csv) {
        export_feature_matrix(run, cfg.downsample_factor(), *features_csv);
        write_manifest(*features_csv, "ingest-check --features", cfg,
                       {{bearing_id, hash_run(run)}});
    }
    return report;
}

void cmd_synth(const config::PipelineConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    const auto synthetic = synth::generate_run(cfg.synth_config(), out_dir.filename().string());
    synth::write_femto_dataset(synthetic, out_dir);
    write_manifest(out_dir / "truth_labels.csv", "synth", cfg,
                   {{"run", hash_run(synthetic.run)}});
}

LabeledRun cmd_label(const fs::path& runs_root, const std::string& bearing_id, LabelMethod method,
                     const config::PipelineConfig& cfg, const fs::path& out_file) {
    cfg.validate();
    const BearingRun run = load_run_for_bearing(runs_root, bearing_id,
                                                cfg.get_double("pipeline.sample_rate"));
    LabeledRun labeled;
    if (method == LabelMethod::ae)
        labeled = label::label_run_ae(run, cfg.label_config()).labeled;
    else if (method == LabelMethod::pca)
        labeled = label::label_run_pca(run, cfg.label_config()).labeled;
    else
        throw Error(Errc::invalid_argument, "label method must be ae or pca");

    label::save_labels_csv(labeled, out_file);
    write_manifest(out_file, std::string("label --method ") + label_method_name(method), cfg,
                   {{bearing_id, hash_run(run)}});
    return labeled;
}

void cmd_train(const fs::path& runs_root, const std::vector<fs::path>& label_files,
               const config::PipelineConfig& cfg, const fs::path& out_model) {
    cfg.validate();
    if (label_files.empty()) throw Error(Errc::invalid_argument, "no label files given");

    std::vector<BearingRun> runs;
    std::vector<LabeledRun> labels;
    std::vector<std::pair<std::string, std::uint64_t>> inputs;
    for (const auto& file : label_files) {
        const std::string id = bearing_id_from_label_file(file);
        labels.push_back(label::load_labels_csv(file, id));
        runs.push_back(load_run_for_bearing(runs_root, id,
                                            cfg.get_double("pipeline.sample_rate")));
        inputs.emplace_back(id, hash_run(runs.back()));
        inputs.emplace_back(file.filename().string(), hash_file(file));
    }

    std::vector<std::pair<const BearingRun*, const LabeledRun*>> pairs;
    pairs.reserve(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) pairs.emplace_back(&runs[i], &labels[i]);

    const auto dataset = classify::build_training_set(pairs, cfg.dataset_config());
    auto fitted = classify::train_classifier(dataset, cfg.classifier_config());
    fitted.model.downsample_factor = cfg.downsample_factor();

    model_io::save_model(fitted.model, out_model);
    write_manifest(out_model, "train", cfg, inputs);
}

void cmd_predict(const fs::path& model_file, const fs::path& run_path,
                 const config::PipelineConfig& cfg, const fs::path& out_csv) {
    cfg.validate();
    const auto model = model_io::load_classifier(model_file);
    const BearingRun raw = load_run_any(run_path, "", cfg.get_double("pipeline.sample_rate"));
    const BearingRun run = prepare_run_for_model(raw, model);
    const auto seq = classify::predict_smoothed(model, run, cfg.smoothing_window());

    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + out_csv.string());
    out << "time_index,p_healthy,p_s1,p_s2,p_s3,stage\n";
    for (std::size_t i = 0; i < seq.smoothed.size(); ++i) {
        out << run.snapshots[i].time_index;
        for (double p : seq.smoothed[i]) out << "," << fmt_prob(p);
        out << "," << stage_index(seq.stages[i]) << "\n";
    }
    write_manifest(out_csv, "predict", cfg,
                   {{raw.bearing_id, hash_run(raw)},
                    {model_file.filename().string(), hash_file(model_file)}});
}

eval::EvaluationReport cmd_evaluate(const fs::path& model_file, const fs::path& runs_root,
                                    const std::vector<fs::path>& label_files,
                                    const config::PipelineConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    if (label_files.empty()) throw Error(Errc::invalid_argument, "no label files given");
    const auto model = model_io::load_classifier(model_file);

    // Sort by bearing id so output order never depends on argument order.
    std::vector<fs::path> files = label_files;
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return bearing_id_from_label_file(a) < bearing_id_from_label_file(b);
    });

    eval::EvaluationReport report;
    report.bearings.resize(files.size());
    std::vector<std::pair<std::string, std::uint64_t>> inputs(files.size());

    parallel_for(files.size(), cfg.jobs(), [&](std::size_t i) {
        const std::string id = bearing_id_from_label_file(files[i]);
        const LabeledRun reference = label::load_labels_csv(files[i], id);
        const BearingRun raw = load_run_for_bearing(runs_root, id,
                                                    cfg.get_double("pipeline.sample_rate"));
        if (reference.labels.size() != raw.size())
            throw Error(Errc::length_mismatch,
                        id + ": " + std::to_string(reference.labels.size()) + " labels vs " +
                            std::to_string(raw.size()) + " snapshots");
        const BearingRun run = prepare_run_for_model(raw, model);
        const auto seq = classify::predict_smoothed(model, run, cfg.smoothing_window());

        eval::BearingEvaluation& be = report.bearings[i];
        be.bearing_id = id;
        be.predicted = seq.stages;
        be.reference = reference.labels;
        LabeledRun predicted_run;
        predicted_run.bearing_id = id;
        predicted_run.run_length = seq.stages.size();
        predicted_run.labels = seq.stages;
        be.accuracy = label::label_agreement(predicted_run, reference);
        be.overlap = eval::stage_overlap(seq.stages);
        be.fault = eval::fault_timing(seq.stages, reference);
        be.diagnostics = eval::compute_diagnostics(raw, model.downsample_factor);
        inputs[i] = {id, hash_run(raw)};
    });

    eval::emit_report(report, out_dir);
    inputs.emplace_back(model_file.filename().string(), hash_file(model_file));
    write_manifest(out_dir / "fault_timing.csv", "evaluate", cfg, inputs);
    return report;
}

} // namespace bearing::pipeline
