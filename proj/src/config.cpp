#include "bearing/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bearing/error.hpp"
#include "bearing/model_io.hpp"

namespace bearing::config {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

} // namespace

PipelineConfig::PipelineConfig() {
    values_ = {
        {"pipeline.downsample_factor", "2"},
        {"pipeline.holdout", "0.2"},
        {"pipeline.smoothing_window", "5"},
        {"pipeline.seed", ""},
        {"pipeline.jobs", "1"},
        {"pipeline.sample_rate", "25600"},
        {"ae.epochs", "200"},
        {"ae.batch", "32"},
        {"ae.learning_rate", "0.001"},
        {"ae.latent", "8"},
        {"pca.components", "40"},
        {"kmeans.restarts", "10"},
        {"kmeans.max_iter", "300"},
        {"kmeans.tol", "0.0001"},
        {"classifier.epochs", "50"},
        {"classifier.batch", "64"},
        {"classifier.learning_rate", "0.001"},
        {"label.assume_stage3", "true"},
        {"synth.sample_rate", "25600"},
        {"synth.snapshot_len", "2560"},
        {"synth.stages", "40,40,20,20"},
        {"synth.shaft_hz", "30"},
        {"synth.fault_hz", "120"},
        {"synth.band_low", "2000"},
        {"synth.band_high", "4000"},
        {"synth.noise_sigma", "0.05"},
        {"synth.healthy_amp", "1.0"},
        {"synth.band_amp", "1.6"},
        {"synth.impulse_amp", "6.0"},
        {"synth.stage3_mult", "5.5"},
        {"synth.ramp_start", "0.6"},
    };
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open config " + path.string());

    PipelineConfig cfg;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw Error(Errc::config_error,
                            path.string() + " line " + std::to_string(line_no) + ": bad section");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::config_error,
                        path.string() + " line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
        cfg.set(key, value);
    }
    return cfg;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(Errc::config_error, "unknown config key: " + key);
    it->second = value;
}

const std::string& PipelineConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(Errc::config_error, "unknown config key: " + key);
    return it->second;
}

int PipelineConfig::get_int(const std::string& key) const {
    try {
        return std::stoi(get(key));
    } catch (const Error&) {
        throw;
    } catch (...) {
        throw Error(Errc::config_error, key + " is not an integer: " + get(key));
    }
}

double PipelineConfig::get_double(const std::string& key) const {
    try {
        return std::stod(get(key));
    } catch (const Error&) {
        throw;
    } catch (...) {
        throw Error(Errc::config_error, key + " is not a number: " + get(key));
    }
}

bool PipelineConfig::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(Errc::config_error, key + " is not a boolean: " + v);
}

std::uint64_t PipelineConfig::seed() const {
    const std::string& v = get("pipeline.seed");
    if (!v.empty()) {
        try {
            return std::stoull(v);
        } catch (...) {
            throw Error(Errc::config_error, "pipeline.seed is not an integer: " + v);
        }
    }
    if (const char* env = std::getenv("BEARING_STAGER_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw Error(Errc::config_error, std::string("BEARING_STAGER_SEED invalid: ") + env);
        }
    }
    return 0;
}

void PipelineConfig::set_seed(std::uint64_t seed) {
    values_["pipeline.seed"] = std::to_string(seed);
}

int PipelineConfig::jobs() const { return get_int("pipeline.jobs"); }
int PipelineConfig::smoothing_window() const { return get_int("pipeline.smoothing_window"); }
int PipelineConfig::downsample_factor() const { return get_int("pipeline.downsample_factor"); }

std::string PipelineConfig::canonical_text() const {
    std::ostringstream out;
    for (const auto& [key, value] : values_) out << key << " = " << value << "\n";
    return out.str();
}

std::uint64_t PipelineConfig::content_hash() const {
    const std::string text = canonical_text();
    return model_io::detail::fnv1a64(reinterpret_cast<const std::uint8_t*>(text.data()),
                                     text.size());
}

void PipelineConfig::validate() const {
    const double holdout = get_double("pipeline.holdout");
    if (!(holdout >= 0.0 && holdout < 1.0))
        throw Error(Errc::config_error, "pipeline.holdout must be in [0, 1)");
    if (smoothing_window() < 1)
        throw Error(Errc::config_error, "pipeline.smoothing_window must be >= 1");
    if (downsample_factor() < 1)
        throw Error(Errc::config_error, "pipeline.downsample_factor must be >= 1");
    if (jobs() < 1) throw Error(Errc::config_error, "pipeline.jobs must be >= 1");
    if (get_int("ae.latent") != embed::kLatentDim)
        throw Error(Errc::config_error, "ae.latent is fixed at 8");
    if (get_int("pca.components") < 1)
        throw Error(Errc::config_error, "pca.components must be >= 1");
    if (get_int("kmeans.restarts") < 1 || get_int("kmeans.max_iter") < 1)
        throw Error(Errc::config_error, "kmeans.restarts/max_iter must be >= 1");
}

label::LabelConfig PipelineConfig::label_config() const {
    label::LabelConfig lc;
    lc.downsample_factor = downsample_factor();
    lc.holdout_fraction = get_double("pipeline.holdout");
    lc.assume_stage3 = get_bool("label.assume_stage3");
    lc.ae.epochs = get_int("ae.epochs");
    lc.ae.batch = get_int("ae.batch");
    lc.ae.learning_rate = get_double("ae.learning_rate");
    lc.pca_components = get_int("pca.components");
    lc.kmeans.restarts = get_int("kmeans.restarts");
    lc.kmeans.max_iter = get_int("kmeans.max_iter");
    lc.kmeans.tol = get_double("kmeans.tol");
    lc.seed = seed();
    return lc;
}

classify::DatasetConfig PipelineConfig::dataset_config() const {
    classify::DatasetConfig dc;
    dc.downsample_factor = downsample_factor();
    dc.seed = seed();
    return dc;
}

classify::ClassifierConfig PipelineConfig::classifier_config() const {
    classify::ClassifierConfig cc;
    cc.epochs = get_int("classifier.epochs");
    cc.batch = get_int("classifier.batch");
    cc.learning_rate = get_double("classifier.learning_rate");
    cc.seed = seed();
    return cc;
}

synth::SynthConfig PipelineConfig::synth_config() const {
    synth::SynthConfig sc;
    sc.sample_rate = get_double("synth.sample_rate");
    sc.snapshot_len = get_int("synth.snapshot_len");
    {
        const std::string& stages = get("synth.stages");
        std::istringstream ss(stages);
        std::string field;
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(ss, field, ','))
                throw Error(Errc::config_error, "synth.stages needs 4 comma-separated counts");
            try {
                sc.snapshots_per_stage[static_cast<std::size_t>(i)] = std::stoi(field);
            } catch (...) {
                throw Error(Errc::config_error, "synth.stages entry not an integer: " + field);
            }
        }
    }
    sc.shaft_hz = get_double("synth.shaft_hz");
    sc.fault_hz = get_double("synth.fault_hz");
    sc.natural_band = {get_double("synth.band_low"), get_double("synth.band_high")};
    sc.noise_sigma = get_double("synth.noise_sigma");
    sc.healthy_amp = get_double("synth.healthy_amp");
    sc.band_noise_amp = get_double("synth.band_amp");
    sc.impulse_amp = get_double("synth.impulse_amp");
    sc.stage3_rms_mult = get_double("synth.stage3_mult");
    sc.ramp_start = get_double("synth.ramp_start");
    sc.seed = seed();
    return sc;
}

} // namespace bearing::config
