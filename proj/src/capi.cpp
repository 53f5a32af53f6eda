#include "bearing_stager.h"

#include <cstring>
#include <fstream>
#include <string>

#include "bearing/error.hpp"
#include "bearing/label.hpp"
#include "bearing/model_io.hpp"
#include "bearing/pipeline.hpp"
#include "bearing/synth.hpp"

using namespace bearing;

struct bsg_config {
    config::PipelineConfig cfg;
};
struct bsg_run {
    BearingRun run;
};
struct bsg_labels {
    LabeledRun labeled;
};
struct bsg_model {
    model_io::AnyModel model;
};

namespace {

thread_local std::string t_last_error;

bsg_status status_for(Errc code) {
    switch (code) {
        case Errc::malformed_row:
        case Errc::empty_file:
        case Errc::non_finite_sample:
            return BSG_ERR_PARSE;
        case Errc::no_snapshots:
        case Errc::inconsistent_length:
        case Errc::length_mismatch:
        case Errc::missing_stage:
            return BSG_ERR_VALIDATION;
        case Errc::indivisible_length:
        case Errc::shape_mismatch:
            return BSG_ERR_SHAPE;
        case Errc::non_finite_input:
        case Errc::too_short:
        case Errc::degenerate_signal:
        case Errc::out_of_range_n:
        case Errc::zero_variance:
        case Errc::too_few_spectra:
        case Errc::diverged_loss:
        case Errc::degenerate_points:
            return BSG_ERR_NUMERIC;
        case Errc::model_not_trained:
            return BSG_ERR_STATE;
        case Errc::invalid_config:
        case Errc::config_error:
            return BSG_ERR_CONFIG;
        case Errc::io_error:
            return BSG_ERR_IO;
        case Errc::corrupt_file:
            return BSG_ERR_CORRUPT_FILE;
        case Errc::wrong_kind:
            return BSG_ERR_WRONG_KIND;
        case Errc::invalid_argument:
            return BSG_ERR_INVALID_ARGUMENT;
    }
    return BSG_ERR_INTERNAL;
}

template <typename Fn>
bsg_status guarded(Fn&& fn) {
    try {
        fn();
        t_last_error.clear();
        return BSG_OK;
    } catch (const Error& e) {
        t_last_error = e.what();
        return status_for(e.code());
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return BSG_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return BSG_ERR_INTERNAL;
    }
}

bsg_status fail_invalid(const char* what) {
    t_last_error = what;
    return BSG_ERR_INVALID_ARGUMENT;
}

void copy_to_buf(const std::string& s, char* buf, size_t buf_size) {
    if (buf_size == 0) return;
    const size_t n = s.size() < buf_size - 1 ? s.size() : buf_size - 1;
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
}

std::vector<std::filesystem::path> to_paths(const char* const* files, size_t count) {
    std::vector<std::filesystem::path> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        if (!files[i]) throw Error(Errc::invalid_argument, "null path in list");
        out.emplace_back(files[i]);
    }
    return out;
}

const classify::StageClassifier& classifier_of(const bsg_model* model) {
    if (const auto* c = std::get_if<classify::StageClassifier>(&model->model)) return *c;
    throw Error(Errc::wrong_kind, "model is not a classifier");
}

} // namespace

extern "C" {

const char* bsg_version(void) { return pipeline::kToolVersion; }

const char* bsg_last_error(void) { return t_last_error.c_str(); }

bsg_config* bsg_config_create(void) { return new bsg_config{}; }

void bsg_config_destroy(bsg_config* cfg) { delete cfg; }

bsg_status bsg_config_load_file(bsg_config* cfg, const char* path) {
    if (!cfg || !path) return fail_invalid("null argument");
    return guarded([&] { cfg->cfg = config::PipelineConfig::from_file(path); });
}

bsg_status bsg_config_set(bsg_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail_invalid("null argument");
    return guarded([&] { cfg->cfg.set(key, value); });
}

bsg_status bsg_config_get(const bsg_config* cfg, const char* key, char* buf, size_t buf_size) {
    if (!cfg || !key || !buf) return fail_invalid("null argument");
    return guarded([&] { copy_to_buf(cfg->cfg.get(key), buf, buf_size); });
}

bsg_status bsg_config_set_seed(bsg_config* cfg, unsigned long long seed) {
    if (!cfg) return fail_invalid("null argument");
    return guarded([&] { cfg->cfg.set_seed(seed); });
}

bsg_status bsg_run_load(const char* path, const char* bearing_id, bsg_run** out) {
    if (!path || !out) return fail_invalid("null argument");
    return guarded([&] {
        auto run = pipeline::load_run_any(path, bearing_id ? bearing_id : "");
        *out = new bsg_run{std::move(run)};
    });
}

bsg_status bsg_run_save_bsr(const bsg_run* run, const char* path) {
    if (!run || !path) return fail_invalid("null argument");
    return guarded([&] { ingest::save_run_binary(run->run, path); });
}

bsg_status bsg_run_snapshot_count(const bsg_run* run, size_t* out) {
    if (!run || !out) return fail_invalid("null argument");
    *out = run->run.size();
    return BSG_OK;
}

bsg_status bsg_run_validate(const bsg_run* run, char** report_text, size_t* issue_count) {
    if (!run || !report_text) return fail_invalid("null argument");
    return guarded([&] {
        const auto report = ingest::validate_run(run->run);
        const std::string text = ingest::report_to_text(report);
        char* copy = new char[text.size() + 1];
        std::memcpy(copy, text.c_str(), text.size() + 1);
        *report_text = copy;
        if (issue_count) *issue_count = report.issues.size();
    });
}

void bsg_run_destroy(bsg_run* run) { delete run; }

void bsg_string_free(char* text) { delete[] text; }

bsg_status bsg_synth_generate(const bsg_config* cfg, bsg_run** run_out, bsg_labels** truth_out) {
    if (!cfg || !run_out) return fail_invalid("null argument");
    return guarded([&] {
        auto synthetic = synth::generate_run(cfg->cfg.synth_config());
        if (truth_out) *truth_out = new bsg_labels{std::move(synthetic.truth)};
        *run_out = new bsg_run{std::move(synthetic.run)};
    });
}

bsg_status bsg_synth_write_dataset(const bsg_config* cfg, const char* out_dir) {
    if (!cfg || !out_dir) return fail_invalid("null argument");
    return guarded([&] { pipeline::cmd_synth(cfg->cfg, out_dir); });
}

bsg_status bsg_label_run(const bsg_run* run, const bsg_config* cfg, const char* method,
                         bsg_labels** out) {
    if (!run || !cfg || !method || !out) return fail_invalid("null argument");
    return guarded([&] {
        const std::string m = method;
        LabeledRun labeled;
        if (m == "ae")
            labeled = label::label_run_ae(run->run, cfg->cfg.label_config()).labeled;
        else if (m == "pca")
            labeled = label::label_run_pca(run->run, cfg->cfg.label_config()).labeled;
        else
            throw Error(Errc::invalid_argument, "method must be ae or pca");
        *out = new bsg_labels{std::move(labeled)};
    });
}

bsg_status bsg_labels_save_csv(const bsg_labels* labels, const char* path) {
    if (!labels || !path) return fail_invalid("null argument");
    return guarded([&] { label::save_labels_csv(labels->labeled, path); });
}

bsg_status bsg_labels_load_csv(const char* path, bsg_labels** out) {
    if (!path || !out) return fail_invalid("null argument");
    return guarded([&] { *out = new bsg_labels{label::load_labels_csv(path)}; });
}

bsg_status bsg_labels_count(const bsg_labels* labels, size_t* out) {
    if (!labels || !out) return fail_invalid("null argument");
    *out = labels->labeled.labels.size();
    return BSG_OK;
}

bsg_status bsg_labels_stage(const bsg_labels* labels, size_t index, int* stage_out) {
    if (!labels || !stage_out) return fail_invalid("null argument");
    if (index >= labels->labeled.labels.size()) return fail_invalid("index out of range");
    *stage_out = stage_index(labels->labeled.labels[index]);
    return BSG_OK;
}

void bsg_labels_destroy(bsg_labels* labels) { delete labels; }

bsg_status bsg_train_classifier(const bsg_run* const* runs, const bsg_labels* const* labels,
                                size_t count, const bsg_config* cfg, bsg_model** out) {
    if (!runs || !labels || !cfg || !out || count == 0) return fail_invalid("null argument");
    return guarded([&] {
        std::vector<std::pair<const BearingRun*, const LabeledRun*>> pairs;
        pairs.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            if (!runs[i] || !labels[i]) throw Error(Errc::invalid_argument, "null run or labels");
            pairs.emplace_back(&runs[i]->run, &labels[i]->labeled);
        }
        const auto dataset = classify::build_training_set(pairs, cfg->cfg.dataset_config());
        auto fitted = classify::train_classifier(dataset, cfg->cfg.classifier_config());
        fitted.model.downsample_factor = cfg->cfg.downsample_factor();
        *out = new bsg_model{std::move(fitted.model)};
    });
}

bsg_status bsg_model_save(const bsg_model* model, const char* path) {
    if (!model || !path) return fail_invalid("null argument");
    return guarded([&] {
        std::visit([&](const auto& m) { model_io::save_model(m, path); }, model->model);
    });
}

bsg_status bsg_model_load(const char* path, bsg_model** out) {
    if (!path || !out) return fail_invalid("null argument");
    return guarded([&] { *out = new bsg_model{model_io::load_model(path)}; });
}

bsg_status bsg_model_kind(const bsg_model* model, char* buf, size_t buf_size) {
    if (!model || !buf) return fail_invalid("null argument");
    const char* kind = std::holds_alternative<embed::EmbeddingModel>(model->model) ? "ae"
                       : std::holds_alternative<embed::PCAModel>(model->model)    ? "pca"
                                                                                  : "classifier";
    copy_to_buf(kind, buf, buf_size);
    return BSG_OK;
}

void bsg_model_destroy(bsg_model* model) { delete model; }

bsg_status bsg_predict_run(const bsg_model* model, const bsg_run* run, const bsg_config* cfg,
                           const char* out_csv) {
    if (!model || !run || !cfg || !out_csv) return fail_invalid("null argument");
    return guarded([&] {
        const auto& classifier = classifier_of(model);
        const BearingRun prepared = pipeline::prepare_run_for_model(run->run, classifier);
        const auto seq =
            classify::predict_smoothed(classifier, prepared, cfg->cfg.smoothing_window());
        std::ofstream out(out_csv, std::ios::trunc);
        if (!out) throw Error(Errc::io_error, std::string("cannot write ") + out_csv);
        out << "time_index,p_healthy,p_s1,p_s2,p_s3,stage\n";
        char buf[32];
        for (size_t i = 0; i < seq.smoothed.size(); ++i) {
            out << prepared.snapshots[i].time_index;
            for (double p : seq.smoothed[i]) {
                std::snprintf(buf, sizeof buf, "%.10g", p);
                out << "," << buf;
            }
            out << "," << stage_index(seq.stages[i]) << "\n";
        }
    });
}

bsg_status bsg_predict_stages(const bsg_model* model, const bsg_run* run, const bsg_config* cfg,
                              int* stages_out, size_t stages_capacity) {
    if (!model || !run || !cfg || !stages_out) return fail_invalid("null argument");
    if (stages_capacity < run->run.size()) return fail_invalid("stages buffer too small");
    return guarded([&] {
        const auto& classifier = classifier_of(model);
        const BearingRun prepared = pipeline::prepare_run_for_model(run->run, classifier);
        const auto seq =
            classify::predict_smoothed(classifier, prepared, cfg->cfg.smoothing_window());
        for (size_t i = 0; i < seq.stages.size(); ++i) stages_out[i] = stage_index(seq.stages[i]);
    });
}

bsg_status bsg_export_features(const bsg_run* run, const bsg_config* cfg, const char* out_csv) {
    if (!run || !cfg || !out_csv) return fail_invalid("null argument");
    return guarded([&] {
        pipeline::export_feature_matrix(run->run, cfg->cfg.downsample_factor(), out_csv);
    });
}

bsg_status bsg_cmd_ingest_check(const char* runs_root, const char* bearing_id,
                                const char* export_bsr_or_null,
                                const char* features_csv_or_null, const bsg_config* cfg,
                                char** report_text, size_t* issue_count) {
    if (!runs_root || !bearing_id || !cfg || !report_text) return fail_invalid("null argument");
    return guarded([&] {
        std::optional<std::filesystem::path> export_path;
        if (export_bsr_or_null) export_path = export_bsr_or_null;
        std::optional<std::filesystem::path> features_path;
        if (features_csv_or_null) features_path = features_csv_or_null;
        const auto report =
            pipeline::cmd_ingest_check(runs_root, bearing_id, export_path, features_path,
                                       cfg->cfg);
        const std::string text = ingest::report_to_text(report);
        char* copy = new char[text.size() + 1];
        std::memcpy(copy, text.c_str(), text.size() + 1);
        *report_text = copy;
        if (issue_count) *issue_count = report.issues.size();
    });
}

bsg_status bsg_cmd_synth(const bsg_config* cfg, const char* out_dir) {
    if (!cfg || !out_dir) return fail_invalid("null argument");
    return guarded([&] { pipeline::cmd_synth(cfg->cfg, out_dir); });
}

bsg_status bsg_cmd_label(const char* runs_root, const char* bearing_id, const char* method,
                         const bsg_config* cfg, const char* out_file) {
    if (!runs_root || !bearing_id || !method || !cfg || !out_file)
        return fail_invalid("null argument");
    return guarded([&] {
        const auto m = label_method_from_name(method);
        if (!m) throw Error(Errc::invalid_argument, "method must be ae or pca");
        pipeline::cmd_label(runs_root, bearing_id, *m, cfg->cfg, out_file);
    });
}

bsg_status bsg_cmd_train(const char* runs_root, const char* const* label_files,
                         size_t label_file_count, const bsg_config* cfg, const char* out_model) {
    if (!runs_root || !label_files || !cfg || !out_model) return fail_invalid("null argument");
    return guarded([&] {
        pipeline::cmd_train(runs_root, to_paths(label_files, label_file_count), cfg->cfg,
                            out_model);
    });
}

bsg_status bsg_cmd_predict(const char* model_file, const char* run_path, const bsg_config* cfg,
                           const char* out_csv) {
    if (!model_file || !run_path || !cfg || !out_csv) return fail_invalid("null argument");
    return guarded([&] { pipeline::cmd_predict(model_file, run_path, cfg->cfg, out_csv); });
}

bsg_status bsg_cmd_evaluate(const char* model_file, const char* runs_root,
                            const char* const* label_files, size_t label_file_count,
                            const bsg_config* cfg, const char* out_dir) {
    if (!model_file || !runs_root || !label_files || !cfg || !out_dir)
        return fail_invalid("null argument");
    return guarded([&] {
        pipeline::cmd_evaluate(model_file, runs_root, to_paths(label_files, label_file_count),
                               cfg->cfg, out_dir);
    });
}

} // extern "C"
