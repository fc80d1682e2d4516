#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "openden/data/dataset.hpp"

namespace openden::training {

using data::CategoryId;
using data::Dataset;
using numerics::Matrix;

// Feature rows with a label per row.
struct LabeledSet {
  Matrix features;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
};

// Per-old-category draw size before capping: floor(new_count / old_count), raised to rho.
std::size_t rehearsal_quota(std::size_t new_count, std::size_t old_count, std::size_t rho);

// Draws per old category after capping each at its size.
std::vector<std::size_t> plan_rehearsal(std::size_t new_count, std::span<const std::size_t> old_sizes,
                                        std::size_t rho);

// `stream` lists the known categories in arrival order; the last one is the
// new category, the others are old. The result holds a uniform draw without
// replacement from each old category's training rows, then every training
// row of the new category. Labels are positions in `stream`.
LabeledSet sample_rehearsal(const Dataset& dataset, std::span<const CategoryId> stream,
                            std::size_t rho, std::mt19937_64& rng);

// All training rows of the listed categories, labelled by position.
LabeledSet training_rows(const Dataset& dataset, std::span<const CategoryId> categories);

}  // namespace openden::training
