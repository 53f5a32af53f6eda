#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "bearing/classify.hpp"
#include "bearing/embed.hpp"

namespace bearing::model_io {

inline constexpr int kFormatVersion = 1;

enum class ModelKind { autoencoder, pca, classifier };
const char* model_kind_name(ModelKind k);

using AnyModel = std::variant<embed::EmbeddingModel, embed::PCAModel, classify::StageClassifier>;

/// Versioned text document: JSON with weight arrays as base64-encoded
/// little-endian IEEE-754 doubles plus a checksum over the raw weight bytes.
/// Round-trips are bit-exact.
void save_model(const embed::EmbeddingModel& model, const std::filesystem::path& path);
void save_model(const embed::PCAModel& model, const std::filesystem::path& path);
void save_model(const classify::StageClassifier& model, const std::filesystem::path& path);

ModelKind peek_kind(const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

/// Typed loads; throw WrongKind when the file holds a different model.
embed::EmbeddingModel load_autoencoder(const std::filesystem::path& path);
embed::PCAModel load_pca(const std::filesystem::path& path);
classify::StageClassifier load_classifier(const std::filesystem::path& path);

namespace detail {

std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::string encode_doubles(const std::vector<double>& v);
std::vector<double> decode_doubles(const std::string& text);

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);

} // namespace detail

} // namespace bearing::model_io
