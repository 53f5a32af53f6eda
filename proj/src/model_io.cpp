#include "bearing/model_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "bearing/error.hpp"

using nlohmann::json;

namespace bearing::model_io {

namespace detail {

namespace {
constexpr char kB64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        std::uint32_t chunk = static_cast<std::uint32_t>(data[i]) << 16;
        if (i + 1 < len) chunk |= static_cast<std::uint32_t>(data[i + 1]) << 8;
        if (i + 2 < len) chunk |= static_cast<std::uint32_t>(data[i + 2]);
        out.push_back(kB64Chars[(chunk >> 18) & 0x3f]);
        out.push_back(kB64Chars[(chunk >> 12) & 0x3f]);
        out.push_back(i + 1 < len ? kB64Chars[(chunk >> 6) & 0x3f] : '=');
        out.push_back(i + 2 < len ? kB64Chars[chunk & 0x3f] : '=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) throw Error(Errc::corrupt_file, "base64 length not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int v[4];
        int pads = 0;
        for (int j = 0; j < 4; ++j) {
            const char c = text[i + static_cast<std::size_t>(j)];
            if (c == '=') {
                v[j] = 0;
                ++pads;
            } else {
                v[j] = value_of(c);
                if (v[j] < 0 || pads > 0) throw Error(Errc::corrupt_file, "bad base64 character");
            }
        }
        const std::uint32_t chunk = (static_cast<std::uint32_t>(v[0]) << 18) |
                                    (static_cast<std::uint32_t>(v[1]) << 12) |
                                    (static_cast<std::uint32_t>(v[2]) << 6) |
                                    static_cast<std::uint32_t>(v[3]);
        out.push_back(static_cast<std::uint8_t>((chunk >> 16) & 0xff));
        if (pads < 2) out.push_back(static_cast<std::uint8_t>((chunk >> 8) & 0xff));
        if (pads < 1) out.push_back(static_cast<std::uint8_t>(chunk & 0xff));
    }
    return out;
}

std::string encode_doubles(const std::vector<double>& v) {
    static_assert(sizeof(double) == 8);
    return base64_encode(reinterpret_cast<const std::uint8_t*>(v.data()), v.size() * 8);
}

std::vector<double> decode_doubles(const std::string& text) {
    const auto bytes = base64_decode(text);
    if (bytes.size() % 8 != 0) throw Error(Errc::corrupt_file, "double array byte count");
    std::vector<double> out(bytes.size() / 8);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t len, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace detail

namespace {

struct Checksum {
    std::uint64_t h = 0xcbf29ce484222325ull;
    void add(const std::vector<double>& v) {
        h = detail::fnv1a64(reinterpret_cast<const std::uint8_t*>(v.data()), v.size() * 8, h);
    }
    std::string hex() const {
        char buf[20];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

json mlp_to_json(const nn::Mlp& net, Checksum& sum) {
    json j;
    j["sizes"] = net.sizes;
    j["relu_after"] = net.relu_after;
    json weights = json::array();
    json biases = json::array();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        weights.push_back(detail::encode_doubles(net.weights[l].a));
        biases.push_back(detail::encode_doubles(net.biases[l]));
        sum.add(net.weights[l].a);
        sum.add(net.biases[l]);
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    return j;
}

nn::Mlp mlp_from_json(const json& j, Checksum& sum) {
    nn::Mlp net;
    net.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    net.relu_after = j.at("relu_after").get<std::vector<bool>>();
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (net.sizes.size() < 2 || weights.size() != net.sizes.size() - 1 ||
        biases.size() != weights.size() || net.relu_after.size() != weights.size())
        throw Error(Errc::corrupt_file, "mlp shape fields inconsistent");
    for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
        Matrix w(net.sizes[l + 1], net.sizes[l]);
        w.a = detail::decode_doubles(weights[l].get<std::string>());
        if (w.a.size() != w.rows * w.cols) throw Error(Errc::corrupt_file, "weight matrix size");
        auto b = detail::decode_doubles(biases[l].get<std::string>());
        if (b.size() != net.sizes[l + 1]) throw Error(Errc::corrupt_file, "bias vector size");
        sum.add(w.a);
        sum.add(b);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

void write_document(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << j.dump(1) << "\n";
    if (!out) throw Error(Errc::io_error, "short write to " + path.string());
}

json read_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(Errc::corrupt_file, path.string() + ": " + e.what());
    }
    if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion)
        throw Error(Errc::corrupt_file, path.string() + ": unsupported format_version");
    return j;
}

void check_sum(const json& j, const Checksum& sum, const std::filesystem::path& path) {
    if (j.at("checksum").get<std::string>() != sum.hex())
        throw Error(Errc::corrupt_file, path.string() + ": checksum mismatch");
}

} // namespace

const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::autoencoder: return "ae";
        case ModelKind::pca: return "pca";
        case ModelKind::classifier: return "classifier";
    }
    return "?";
}

void save_model(const embed::EmbeddingModel& model, const std::filesystem::path& path) {
    Checksum sum;
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "ae";
    j["seed"] = model.seed;
    j["latent_dim"] = model.latent_dim;
    j["trained"] = model.trained;
    j["residual_mean"] = model.residual_mean;
    j["residual_std"] = model.residual_std;
    j["encoder"] = mlp_to_json(model.encoder, sum);
    j["decoder"] = mlp_to_json(model.decoder, sum);
    j["bin_mean"] = detail::encode_doubles(model.bin_mean);
    j["bin_std"] = detail::encode_doubles(model.bin_std);
    sum.add(model.bin_mean);
    sum.add(model.bin_std);
    j["checksum"] = sum.hex();
    write_document(j, path);
}

void save_model(const embed::PCAModel& model, const std::filesystem::path& path) {
    Checksum sum;
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "pca";
    j["rows"] = model.components.rows;
    j["cols"] = model.components.cols;
    j["components"] = detail::encode_doubles(model.components.a);
    j["bin_mean"] = detail::encode_doubles(model.bin_mean);
    j["explained_variance_ratio"] = detail::encode_doubles(model.explained_variance_ratio);
    sum.add(model.components.a);
    sum.add(model.bin_mean);
    sum.add(model.explained_variance_ratio);
    j["checksum"] = sum.hex();
    write_document(j, path);
}

void save_model(const classify::StageClassifier& model, const std::filesystem::path& path) {
    Checksum sum;
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "classifier";
    j["seed"] = model.seed;
    j["spectrum_bins"] = model.spectrum_bins;
    j["input_len"] = model.input_len;
    j["sample_rate"] = model.sample_rate;
    j["downsample_factor"] = model.downsample_factor;
    j["stage_names"] = model.stage_names;
    j["freq_branch"] = mlp_to_json(model.freq_branch, sum);
    j["fusion"] = mlp_to_json(model.fusion, sum);
    j["bin_mean"] = detail::encode_doubles(model.bin_mean);
    j["bin_std"] = detail::encode_doubles(model.bin_std);
    j["feat_mean"] = detail::encode_doubles(model.feat_mean);
    j["feat_std"] = detail::encode_doubles(model.feat_std);
    std::vector<double> cw(model.class_weights.begin(), model.class_weights.end());
    j["class_weights"] = detail::encode_doubles(cw);
    sum.add(model.bin_mean);
    sum.add(model.bin_std);
    sum.add(model.feat_mean);
    sum.add(model.feat_std);
    sum.add(cw);
    j["checksum"] = sum.hex();
    write_document(j, path);
}

ModelKind peek_kind(const std::filesystem::path& path) {
    const json j = read_document(path);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ae") return ModelKind::autoencoder;
    if (kind == "pca") return ModelKind::pca;
    if (kind == "classifier") return ModelKind::classifier;
    throw Error(Errc::corrupt_file, path.string() + ": unknown kind " + kind);
}

namespace {

embed::EmbeddingModel ae_from_json(const json& j, const std::filesystem::path& path) {
    Checksum sum;
    embed::EmbeddingModel model;
    model.seed = j.at("seed").get<std::uint64_t>();
    model.latent_dim = j.at("latent_dim").get<int>();
    model.trained = j.at("trained").get<bool>();
    model.residual_mean = j.at("residual_mean").get<double>();
    model.residual_std = j.at("residual_std").get<double>();
    model.encoder = mlp_from_json(j.at("encoder"), sum);
    model.decoder = mlp_from_json(j.at("decoder"), sum);
    model.bin_mean = detail::decode_doubles(j.at("bin_mean").get<std::string>());
    model.bin_std = detail::decode_doubles(j.at("bin_std").get<std::string>());
    sum.add(model.bin_mean);
    sum.add(model.bin_std);
    check_sum(j, sum, path);
    if (model.bin_mean.size() != model.encoder.input_size() ||
        model.bin_std.size() != model.encoder.input_size())
        throw Error(Errc::corrupt_file, path.string() + ": scaling stats size");
    return model;
}

embed::PCAModel pca_from_json(const json& j, const std::filesystem::path& path) {
    Checksum sum;
    embed::PCAModel model;
    model.components = Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    model.components.a = detail::decode_doubles(j.at("components").get<std::string>());
    model.bin_mean = detail::decode_doubles(j.at("bin_mean").get<std::string>());
    model.explained_variance_ratio =
        detail::decode_doubles(j.at("explained_variance_ratio").get<std::string>());
    sum.add(model.components.a);
    sum.add(model.bin_mean);
    sum.add(model.explained_variance_ratio);
    check_sum(j, sum, path);
    if (model.components.a.size() != model.components.rows * model.components.cols ||
        model.bin_mean.size() != model.components.cols)
        throw Error(Errc::corrupt_file, path.string() + ": component matrix size");
    return model;
}

classify::StageClassifier classifier_from_json(const json& j, const std::filesystem::path& path) {
    Checksum sum;
    classify::StageClassifier model;
    model.seed = j.at("seed").get<std::uint64_t>();
    model.spectrum_bins = j.at("spectrum_bins").get<std::size_t>();
    model.input_len = j.at("input_len").get<std::size_t>();
    model.sample_rate = j.at("sample_rate").get<double>();
    model.downsample_factor = j.at("downsample_factor").get<int>();
    model.stage_names = j.at("stage_names").get<std::vector<std::string>>();
    model.freq_branch = mlp_from_json(j.at("freq_branch"), sum);
    model.fusion = mlp_from_json(j.at("fusion"), sum);
    model.bin_mean = detail::decode_doubles(j.at("bin_mean").get<std::string>());
    model.bin_std = detail::decode_doubles(j.at("bin_std").get<std::string>());
    model.feat_mean = detail::decode_doubles(j.at("feat_mean").get<std::string>());
    model.feat_std = detail::decode_doubles(j.at("feat_std").get<std::string>());
    const auto cw = detail::decode_doubles(j.at("class_weights").get<std::string>());
    if (cw.size() != kStageCount) throw Error(Errc::corrupt_file, "class_weights size");
    std::copy(cw.begin(), cw.end(), model.class_weights.begin());
    sum.add(model.bin_mean);
    sum.add(model.bin_std);
    sum.add(model.feat_mean);
    sum.add(model.feat_std);
    sum.add(cw);
    check_sum(j, sum, path);
    return model;
}

} // namespace

AnyModel load_model(const std::filesystem::path& path) {
    const json j = read_document(path);
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "ae") return ae_from_json(j, path);
        if (kind == "pca") return pca_from_json(j, path);
        if (kind == "classifier") return classifier_from_json(j, path);
    } catch (const json::exception& e) {
        throw Error(Errc::corrupt_file, path.string() + ": " + e.what());
    }
    throw Error(Errc::corrupt_file, path.string() + ": unknown kind " + kind);
}

embed::EmbeddingModel load_autoencoder(const std::filesystem::path& path) {
    auto any = load_model(path);
    if (auto* m = std::get_if<embed::EmbeddingModel>(&any)) return std::move(*m);
    throw Error(Errc::wrong_kind, path.string() + " does not hold an autoencoder");
}

embed::PCAModel load_pca(const std::filesystem::path& path) {
    auto any = load_model(path);
    if (auto* m = std::get_if<embed::PCAModel>(&any)) return std::move(*m);
    throw Error(Errc::wrong_kind, path.string() + " does not hold a pca model");
}

classify::StageClassifier load_classifier(const std::filesystem::path& path) {
    auto any = load_model(path);
    if (auto* m = std::get_if<classify::StageClassifier>(&any)) return std::move(*m);
    throw Error(Errc::wrong_kind, path.string() + " does not hold a classifier");
}

} // namespace bearing::model_io
