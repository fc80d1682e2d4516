#include "openden/training/rehearsal.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "openden/error.hpp"

namespace openden::training {
namespace {

void append_row(LabeledSet& set, std::span<const double> row, std::size_t label, std::size_t& next) {
  std::copy(row.begin(), row.end(), set.features.row(next).begin());
  set.labels.push_back(label);
  ++next;
}

const data::CategoryRecord& category(const Dataset& ds, CategoryId id) {
  if (id >= ds.category_count()) {
    throw IndexError("category " + std::to_string(id) + " is not in the dataset");
  }
  return ds.categories[id];
}

}  // namespace

std::size_t rehearsal_quota(std::size_t new_count, std::size_t old_count, std::size_t rho) {
  if (old_count == 0) throw ProtocolError("rehearsal needs at least one old category");
  return std::max(new_count / old_count, rho);
}

std::vector<std::size_t> plan_rehearsal(std::size_t new_count, std::span<const std::size_t> old_sizes,
                                        std::size_t rho) {
  if (new_count == 0) throw DataError("rehearsal: the new category has no training instances");
  const std::size_t s = rehearsal_quota(new_count, old_sizes.size(), rho);
  std::vector<std::size_t> plan;
  for (std::size_t n : old_sizes) {
    if (n == 0) throw DataError("rehearsal: an old category has no training instances");
    plan.push_back(std::min(s, n));
  }
  return plan;
}

LabeledSet sample_rehearsal(const Dataset& dataset, std::span<const CategoryId> stream,
                            std::size_t rho, std::mt19937_64& rng) {
  if (stream.size() < 2) throw ProtocolError("sample_rehearsal: need at least one old and one new category");
  const auto& fresh = category(dataset, stream.back());
  std::vector<std::size_t> old_sizes;
  for (std::size_t i = 0; i + 1 < stream.size(); ++i) {
    old_sizes.push_back(category(dataset, stream[i]).train.rows());
  }
  const auto plan = plan_rehearsal(fresh.train.rows(), old_sizes, rho);
  const std::size_t total = std::accumulate(plan.begin(), plan.end(), fresh.train.rows());

  LabeledSet out;
  out.features = Matrix(total, dataset.feature_dim);
  out.labels.reserve(total);
  std::size_t next = 0;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& rec = dataset.categories[stream[i]];
    pool.resize(rec.train.rows());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // Partial Fisher-Yates: the first plan[i] slots are a uniform sample.
    for (std::size_t j = 0; j < plan[i]; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
      std::swap(pool[j], pool[pick(rng)]);
      append_row(out, rec.train.row(pool[j]), i, next);
    }
  }
  for (std::size_t r = 0; r < fresh.train.rows(); ++r) {
    append_row(out, fresh.train.row(r), stream.size() - 1, next);
  }
  return out;
}

LabeledSet training_rows(const Dataset& dataset, std::span<const CategoryId> categories) {
  std::size_t total = 0;
  for (CategoryId c : categories) total += category(dataset, c).train.rows();
  LabeledSet out;
  out.features = Matrix(total, dataset.feature_dim);
  out.labels.reserve(total);
  std::size_t next = 0;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const auto& rec = dataset.categories[categories[i]];
    for (std::size_t r = 0; r < rec.train.rows(); ++r) append_row(out, rec.train.row(r), i, next);
  }
  return out;
}

}  // namespace openden::training
