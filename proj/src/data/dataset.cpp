#include "openden/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "openden/error.hpp"

namespace openden::data {

const char* to_string(SourceKind kind) noexcept {
  switch (kind) {
    case SourceKind::precomputed: return "precomputed";
    case SourceKind::frozen_projection: return "frozen-projection";
    case SourceKind::synthetic: return "synthetic";
  }
  return "unknown";
}

std::size_t Dataset::train_size() const noexcept {
  std::size_t n = 0;
  for (const auto& c : categories) n += c.train.rows();
  return n;
}

std::size_t Dataset::test_size() const noexcept {
  std::size_t n = 0;
  for (const auto& c : categories) n += c.test.rows();
  return n;
}

void Dataset::validate() const {
  if (feature_dim == 0) throw DataError("dataset: feature_dim must be >= 1");
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const auto& c = categories[i];
    if (c.id != i) {
      throw DataError("dataset: category IDs must be dense 0..C-1 (found " + std::to_string(c.id) +
                      " at position " + std::to_string(i) + ")");
    }
    for (const Matrix* m : {&c.train, &c.test}) {
      if (m->rows() > 0 && m->cols() != feature_dim) {
        throw DataError("dataset: category '" + c.name + "' has features of length " +
                        std::to_string(m->cols()) + ", expected " + std::to_string(feature_dim));
      }
    }
    if (c.train_ids.size() != c.train.rows() || c.test_ids.size() != c.test.rows()) {
      throw DataError("dataset: category '" + c.name + "' has mismatched instance ID lists");
    }
    std::unordered_set<std::string> train_ids(c.train_ids.begin(), c.train_ids.end());
    for (const auto& id : c.test_ids) {
      if (train_ids.count(id)) {
        throw DataError("dataset: instance '" + id + "' of category '" + c.name +
                        "' appears in both train and test");
      }
    }
  }
}

Dataset split_train_test(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("split_train_test: test_fraction must be in (0, 1)");
  }
  Dataset out;
  out.feature_dim = dataset.feature_dim;
  out.source = dataset.source;
  out.descriptor = dataset.descriptor;
  std::mt19937_64 rng(seed);
  for (const auto& c : dataset.categories) {
    const std::size_t n = c.train.rows() + c.test.rows();
    if (n < 2) {
      throw DataError("split_train_test: category '" + c.name + "' has fewer than 2 instances");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

    auto fetch = [&](std::size_t i) -> std::pair<std::span<const double>, const std::string*> {
      if (i < c.train.rows()) return {c.train.row(i), &c.train_ids[i]};
      const std::size_t j = i - c.train.rows();
      return {c.test.row(j), &c.test_ids[j]};
    };

    CategoryRecord rec;
    rec.id = c.id;
    rec.name = c.name;
    rec.train = Matrix(n - n_test, dataset.feature_dim);
    rec.test = Matrix(n_test, dataset.feature_dim);
    for (std::size_t k = 0; k < n; ++k) {
      auto [row, id] = fetch(order[k]);
      const bool to_test = k < n_test;
      Matrix& dst = to_test ? rec.test : rec.train;
      const std::size_t r = to_test ? k : k - n_test;
      std::copy(row.begin(), row.end(), dst.row(r).begin());
      (to_test ? rec.test_ids : rec.train_ids).push_back(*id);
    }
    out.categories.push_back(std::move(rec));
  }
  out.validate();
  return out;
}

Dataset make_synthetic_stream(const SyntheticSpec& spec) {
  if (spec.categories < 2) throw ConfigError("synthetic stream: need at least 2 categories");
  if (spec.dim < 2) throw ConfigError("synthetic stream: dim must be >= 2");
  if (spec.instances_per_category < 2) {
    throw ConfigError("synthetic stream: need at least 2 instances per category");
  }
  if (spec.separation < 0.0) throw ConfigError("synthetic stream: separation must be >= 0");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset ds;
  ds.feature_dim = spec.dim;
  ds.source = SourceKind::synthetic;
  std::ostringstream desc;
  desc << "synthetic:" << spec.categories << ',' << spec.instances_per_category << ',' << spec.dim
       << ',' << spec.separation << ',' << spec.seed;
  ds.descriptor = desc.str();

  const std::size_t n = spec.instances_per_category;
  const auto n_test = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * 0.2)), 1, n - 1);
  const std::size_t n_train = n - n_test;

  for (std::size_t c = 0; c < spec.categories; ++c) {
    std::vector<double> mean(spec.dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& m : mean) {
        m = gauss(rng);
        norm += m * m;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& m : mean) m = m / norm * spec.separation;

    CategoryRecord rec;
    rec.id = c;
    rec.name = "blob" + std::to_string(c);
    rec.train = Matrix(n_train, spec.dim);
    rec.test = Matrix(n_test, spec.dim);
    for (std::size_t i = 0; i < n; ++i) {
      const bool train = i < n_train;
      auto row = train ? rec.train.row(i) : rec.test.row(i - n_train);
      for (std::size_t d = 0; d < spec.dim; ++d) row[d] = mean[d] + gauss(rng);
      (train ? rec.train_ids : rec.test_ids)
          .push_back("blob" + std::to_string(c) + "/" + std::to_string(i));
    }
    ds.categories.push_back(std::move(rec));
  }
  return ds;
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
  const std::string prefix = "synthetic:";
  if (text.rfind(prefix, 0) != 0) throw ConfigError("not a synthetic dataset spec: " + text);
  std::vector<std::string> parts;
  std::stringstream ss(text.substr(prefix.size()));
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 4 && parts.size() != 5) {
    throw ConfigError("synthetic dataset spec must be synthetic:C,n,dim,sep[,seed], got " + text);
  }
  SyntheticSpec spec;
  try {
    spec.categories = std::stoul(parts[0]);
    spec.instances_per_category = std::stoul(parts[1]);
    spec.dim = std::stoul(parts[2]);
    spec.separation = std::stod(parts[3]);
    if (parts.size() == 5) {
      spec.seed = std::stoull(parts[4]);
      spec.explicit_seed = true;
    }
  } catch (const std::exception&) {
    throw ConfigError("malformed synthetic dataset spec: " + text);
  }
  return spec;
}

}  // namespace openden::data
