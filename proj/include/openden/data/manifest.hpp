#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "openden/data/dataset.hpp"
#include "openden/data/features.hpp"

namespace openden::data {

struct ExtractorSpec {
  ExtractorKind kind = ExtractorKind::identity;
  std::size_t output_dim = 0;
  std::uint64_t seed = 0;

  // "identity" or "projection:<output_dim>:<seed>".
  static ExtractorSpec parse(const std::string& text);
  std::string to_string() const;
  FrozenExtractor build(std::size_t identity_dim) const;
};

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct ManifestCategory {
  CategoryId id = 0;
  std::string name;
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// JSON manifest:
//   {"feature_dim": N,
//    "categories": [{"id": 0, "name": "...", "train": [paths], "test": [paths]}],
//    "extractor": {"kind": "projection", "output_dim": N, "seed": S},   (optional)
//    "split": {"test_fraction": 0.2, "seed": S}}                        (optional)
// Paths are relative to the manifest's directory. A path ending in ".fvec"
// is a feature file; any other path is a view-triplet prefix and needs the
// projection extractor. "split" re-splits the pooled instances per category.
struct Manifest {
  std::size_t feature_dim = 0;
  std::vector<ManifestCategory> categories;
  std::optional<ExtractorSpec> extractor;
  std::optional<SplitSpec> split;
};

Manifest parse_manifest(const std::string& json_text);
std::string dump_manifest(const Manifest& manifest);

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Dataset load_manifest(const std::filesystem::path& path);

}  // namespace openden::data
