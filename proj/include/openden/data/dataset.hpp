#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "openden/numerics/matrix.hpp"

namespace openden::data {

using numerics::Matrix;
using CategoryId = std::size_t;

// One category: feature rows for train and test plus stable instance IDs.
struct CategoryRecord {
  CategoryId id = 0;
  std::string name;
  Matrix train;
  Matrix test;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

enum class SourceKind { precomputed, frozen_projection, synthetic };

const char* to_string(SourceKind kind) noexcept;

struct Dataset {
  std::vector<CategoryRecord> categories;
  std::size_t feature_dim = 0;
  SourceKind source = SourceKind::precomputed;
  // Human-readable origin, e.g. a manifest path or "synthetic:10,200,32,8".
  std::string descriptor;

  std::size_t category_count() const noexcept { return categories.size(); }
  std::size_t train_size() const noexcept;
  std::size_t test_size() const noexcept;

  // Feature lengths, dense IDs 0..C-1, ID/row counts, and no instance shared
  // by the train and test side of a category. Throws DataError.
  void validate() const;
};

// Per-category stratified re-split of all instances, shuffled under `seed`.
// Each category keeps at least one instance on each side.
Dataset split_train_test(const Dataset& dataset, double test_fraction, std::uint64_t seed);

struct SyntheticSpec {
  std::size_t categories = 10;
  std::size_t instances_per_category = 200;
  std::size_t dim = 32;
  double separation = 8.0;
  std::uint64_t seed = 0;
  // Set by parse_synthetic_spec when the text carried its own seed.
  bool explicit_seed = false;
};

// Isotropic unit-variance Gaussian blobs around means drawn uniformly on a
// sphere of radius `separation`; first 80% of each category is train.
Dataset make_synthetic_stream(const SyntheticSpec& spec);

// Parses "synthetic:C,n,dim,sep" (seed supplied separately).
SyntheticSpec parse_synthetic_spec(const std::string& text);

}  // namespace openden::data
