#include "openden/data/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "openden/error.hpp"

namespace openden::data {

using nlohmann::json;

ExtractorSpec ExtractorSpec::parse(const std::string& text) {
  ExtractorSpec spec;
  if (text == "identity") return spec;
  const std::string prefix = "projection:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string rest = text.substr(prefix.size());
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        spec.kind = ExtractorKind::projection;
        spec.output_dim = std::stoul(rest.substr(0, colon));
        spec.seed = std::stoull(rest.substr(colon + 1));
        if (spec.output_dim > 0) return spec;
      } catch (const std::exception&) {
      }
    }
  }
  throw ConfigError("extractor must be 'identity' or 'projection:<dim>:<seed>', got '" + text + "'");
}

std::string ExtractorSpec::to_string() const {
  if (kind == ExtractorKind::identity) return "identity";
  return "projection:" + std::to_string(output_dim) + ":" + std::to_string(seed);
}

FrozenExtractor ExtractorSpec::build(std::size_t identity_dim) const {
  if (kind == ExtractorKind::identity) return FrozenExtractor::identity(identity_dim);
  return FrozenExtractor::projection(output_dim, seed);
}

Manifest parse_manifest(const std::string& json_text) {
  Manifest m;
  try {
    const json doc = json::parse(json_text);
    m.feature_dim = doc.at("feature_dim").get<std::size_t>();
    for (const auto& c : doc.at("categories")) {
      ManifestCategory cat;
      cat.id = c.at("id").get<CategoryId>();
      cat.name = c.value("name", "category" + std::to_string(cat.id));
      cat.train = c.value("train", std::vector<std::string>{});
      cat.test = c.value("test", std::vector<std::string>{});
      m.categories.push_back(std::move(cat));
    }
    if (doc.contains("extractor")) {
      const auto& e = doc["extractor"];
      ExtractorSpec spec;
      const std::string kind = e.at("kind").get<std::string>();
      if (kind == "projection") {
        spec.kind = ExtractorKind::projection;
        spec.output_dim = e.at("output_dim").get<std::size_t>();
        spec.seed = e.value("seed", std::uint64_t{0});
      } else if (kind != "identity") {
        throw DataError("manifest: unknown extractor kind '" + kind + "'");
      }
      m.extractor = spec;
    }
    if (doc.contains("split")) {
      SplitSpec split;
      split.test_fraction = doc["split"].value("test_fraction", 0.2);
      split.seed = doc["split"].value("seed", std::uint64_t{0});
      m.split = split;
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  return m;
}

std::string dump_manifest(const Manifest& manifest) {
  json doc;
  doc["feature_dim"] = manifest.feature_dim;
  doc["categories"] = json::array();
  for (const auto& c : manifest.categories) {
    doc["categories"].push_back({{"id", c.id}, {"name", c.name}, {"train", c.train}, {"test", c.test}});
  }
  if (manifest.extractor) {
    const auto& e = *manifest.extractor;
    if (e.kind == ExtractorKind::identity) {
      doc["extractor"] = {{"kind", "identity"}};
    } else {
      doc["extractor"] = {{"kind", "projection"}, {"output_dim", e.output_dim}, {"seed", e.seed}};
    }
  }
  if (manifest.split) {
    doc["split"] = {{"test_fraction", manifest.split->test_fraction}, {"seed", manifest.split->seed}};
  }
  return doc.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << dump_manifest(manifest);
  if (!out) throw IoError("failed writing manifest " + path.string());
}

namespace {

bool is_feature_path(const std::string& p) {
  return p.size() >= 5 && p.compare(p.size() - 5, 5, ".fvec") == 0;
}

}  // namespace

Dataset load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const Manifest m = parse_manifest(ss.str());
  if (m.feature_dim == 0) throw DataError("manifest: feature_dim must be >= 1");

  const std::filesystem::path base = path.parent_path();
  std::optional<FrozenExtractor> extractor;
  if (m.extractor && m.extractor->kind == ExtractorKind::projection) {
    if (m.extractor->output_dim != m.feature_dim) {
      throw DataError("manifest: extractor output_dim differs from feature_dim");
    }
    extractor = m.extractor->build(m.feature_dim);
  }

  auto load_instance = [&](const std::string& rel) -> std::vector<double> {
    const std::filesystem::path full = base / rel;
    std::vector<double> features;
    if (is_feature_path(rel)) {
      features = read_fvec(full);
    } else {
      if (!extractor) {
        throw DataError("manifest: instance '" + rel +
                        "' is a view triplet but the manifest has no projection extractor");
      }
      features = extractor->extract(merge_views(read_view_triplet(full)));
    }
    if (features.size() != m.feature_dim) {
      throw DataError("manifest: instance '" + rel + "' has dimension " +
                      std::to_string(features.size()) + ", expected " + std::to_string(m.feature_dim));
    }
    return features;
  };

  Dataset ds;
  ds.feature_dim = m.feature_dim;
  ds.source = extractor ? SourceKind::frozen_projection : SourceKind::precomputed;
  ds.descriptor = path.string();
  std::vector<ManifestCategory> cats = m.categories;
  std::sort(cats.begin(), cats.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& c : cats) {
    CategoryRecord rec;
    rec.id = c.id;
    rec.name = c.name;
    rec.train = Matrix(c.train.size(), m.feature_dim);
    rec.test = Matrix(c.test.size(), m.feature_dim);
    for (std::size_t i = 0; i < c.train.size(); ++i) {
      const auto f = load_instance(c.train[i]);
      std::copy(f.begin(), f.end(), rec.train.row(i).begin());
    }
    for (std::size_t i = 0; i < c.test.size(); ++i) {
      const auto f = load_instance(c.test[i]);
      std::copy(f.begin(), f.end(), rec.test.row(i).begin());
    }
    rec.train_ids = c.train;
    rec.test_ids = c.test;
    ds.categories.push_back(std::move(rec));
  }
  ds.validate();
  if (m.split) ds = split_train_test(ds, m.split->test_fraction, m.split->seed);
  return ds;
}

}  // namespace openden::data
