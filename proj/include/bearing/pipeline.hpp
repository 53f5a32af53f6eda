#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bearing/config.hpp"
#include "bearing/eval.hpp"
#include "bearing/ingest.hpp"

namespace bearing::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";

/// Load a run from either a FEMTO-layout directory or a .bsr container.
BearingRun load_run_any(const std::filesystem::path& path, const std::string& bearing_id = "",
                        double sample_rate = 25600.0);

/// Decimate a raw run down to the classifier's expected snapshot length.
/// No-op when lengths already match; throws ShapeMismatch when no integer
/// factor fits.
BearingRun prepare_run_for_model(const BearingRun& run, const classify::StageClassifier& model);

/// Content hash over a run's sample data (both channels, snapshot order).
std::uint64_t hash_run(const BearingRun& run);
std::uint64_t hash_file(const std::filesystem::path& path);

/// Sidecar manifest for a written artifact: tool version, command, full
/// config, config hash, seed, and input content hashes. No timestamps, so
/// identical runs produce identical manifests.
void write_manifest(const std::filesystem::path& artifact, const std::string& command,
                    const config::PipelineConfig& cfg,
                    const std::vector<std::pair<std::string, std::uint64_t>>& inputs);

/// 26-column feature matrix (13 per channel) for every snapshot of a run.
void export_feature_matrix(const BearingRun& run, int downsample_factor,
                           const std::filesystem::path& out_csv);

ingest::ValidationReport cmd_ingest_check(const std::filesystem::path& root,
                                          const std::string& bearing_id,
                                          const std::optional<std::filesystem::path>& export_bsr,
                                          const std::optional<std::filesystem::path>& features_csv,
                                          const config::PipelineConfig& cfg);

void cmd_synth(const config::PipelineConfig& cfg, const std::filesystem::path& out_dir);

LabeledRun cmd_label(const std::filesystem::path& runs_root, const std::string& bearing_id,
                     LabelMethod method, const config::PipelineConfig& cfg,
                     const std::filesystem::path& out_file);

/// Bearing ids are derived from each label file's stem (text before the
/// first dot), and runs are loaded from runs_root/<id> or runs_root/<id>.bsr.
void cmd_train(const std::filesystem::path& runs_root,
               const std::vector<std::filesystem::path>& label_files,
               const config::PipelineConfig& cfg, const std::filesystem::path& out_model);

void cmd_predict(const std::filesystem::path& model_file, const std::filesystem::path& run_path,
                 const config::PipelineConfig& cfg, const std::filesystem::path& out_csv);

eval::EvaluationReport cmd_evaluate(const std::filesystem::path& model_file,
                                    const std::filesystem::path& runs_root,
                                    const std::vector<std::filesystem::path>& label_files,
                                    const config::PipelineConfig& cfg,
                                    const std::filesystem::path& out_dir);

} // namespace bearing::pipeline
