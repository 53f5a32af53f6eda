#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "bearing/classify.hpp"
#include "bearing/label.hpp"
#include "bearing/synth.hpp"

namespace bearing::config {

/// Flat key=value pipeline configuration. Files are line-oriented with
/// [section] headers; a key inside [ae] named epochs becomes "ae.epochs".
/// Every key has a paper-anchored default; setting an unknown key is a
/// ConfigError so typos fail loudly.
class PipelineConfig {
public:
    PipelineConfig();  // defaults

    static PipelineConfig from_file(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;

    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    /// pipeline.seed when set; falls back to the BEARING_STAGER_SEED
    /// environment variable, then 0.
    std::uint64_t seed() const;
    void set_seed(std::uint64_t seed);

    int jobs() const;
    int smoothing_window() const;
    int downsample_factor() const;

    /// Deterministic "key = value" listing, sorted by key.
    std::string canonical_text() const;
    std::uint64_t content_hash() const;

    /// Bounds checks on the cross-cutting invariants (holdout in [0,1),
    /// window >= 1, factor >= 1, ...). Throws ConfigError.
    void validate() const;

    label::LabelConfig label_config() const;
    classify::DatasetConfig dataset_config() const;
    classify::ClassifierConfig classifier_config() const;
    synth::SynthConfig synth_config() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace bearing::config
