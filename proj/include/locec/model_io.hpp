/// Binary model container.
///
/// Layout (all integers unsigned little-endian, strings are a u32 byte
/// length followed by the bytes):
///   8 bytes   magic "LOCECMDL"
///   u32       format version (1)
///   string    kind ("commcnn", "baseline" or "edge-lr")
///   u32       label count, then each label as a string
///   u32       hyperparameter count, then key and value strings
///   u32       tensor count, then per tensor:
///               string name, u32 rank, rank x u64 dims,
///               product(dims) x f64 (IEEE 754 binary64, little-endian)

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "locec/classifier.hpp"
#include "locec/tensor.hpp"

namespace locec {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelFile {
  std::string kind;
  std::vector<std::string> labels;
  std::vector<std::pair<std::string, std::string>> hyper;
  TensorList tensors;

  /// Value of a hyperparameter; throws DataError when absent.
  const std::string& hyper_value(const std::string& key) const;
  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

std::string encode_model(const ModelFile& m);
/// Throws DataError (with `source` as the path) on malformed input.
ModelFile decode_model(const std::string& bytes, const std::string& source = "<memory>");

void write_model_file(const std::filesystem::path& path, const ModelFile& m);
ModelFile read_model_file(const std::filesystem::path& path);

void save_community_classifier(const std::filesystem::path& path, const CommunityClassifier& c);
CommunityClassifier load_community_classifier(const std::filesystem::path& path);

}  // namespace locec
