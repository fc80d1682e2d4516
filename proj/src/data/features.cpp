#include "openden/data/features.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "openden/error.hpp"

namespace openden::data {

std::vector<std::uint8_t> encode_fvec(std::span<const double> values) {
  std::vector<std::uint8_t> out = {'F', 'V', 'E', 'C'};
  const auto dim = static_cast<std::uint32_t>(values.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(dim >> (8 * i)));
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return out;
}

void write_fvec(const std::filesystem::path& path, std::span<const double> values) {
  const auto bytes = encode_fvec(values);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write feature file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing feature file " + path.string());
}

std::vector<double> read_fvec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 8 || std::memcmp(buf.data(), "FVEC", 4) != 0) {
    throw DataError("feature file " + path.string() + " lacks the FVEC header");
  }
  std::uint32_t dim = 0;
  for (int i = 0; i < 4; ++i) dim |= static_cast<std::uint32_t>(buf[4 + i]) << (8 * i);
  if (buf.size() != 8 + 4 * static_cast<std::size_t>(dim)) {
    throw DataError("feature file " + path.string() + " declares dimension " + std::to_string(dim) +
                    " but holds " + std::to_string((buf.size() - 8) / 4) + " values");
  }
  std::vector<double> out(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(buf[8 + 4 * k + i]) << (8 * i);
    out[k] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return out;
}

FrozenExtractor FrozenExtractor::identity(std::size_t dim) {
  if (dim == 0) throw ConfigError("identity extractor: dim must be >= 1");
  FrozenExtractor ex;
  ex.kind_ = ExtractorKind::identity;
  ex.input_dim_ = dim;
  ex.output_dim_ = dim;
  return ex;
}

FrozenExtractor FrozenExtractor::projection(std::size_t output_dim, std::uint64_t seed,
                                            std::size_t input_dim) {
  if (output_dim == 0 || input_dim == 0) throw ConfigError("projection extractor: dims must be >= 1");
  FrozenExtractor ex;
  ex.kind_ = ExtractorKind::projection;
  ex.input_dim_ = input_dim;
  ex.output_dim_ = output_dim;
  ex.seed_ = seed;
  ex.projection_ = numerics::Matrix(output_dim, input_dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (double& v : ex.projection_.values()) v = gauss(rng) * scale;
  return ex;
}

std::vector<double> FrozenExtractor::extract(std::span<const double> raw) const {
  if (raw.size() != input_dim_) {
    throw ShapeError("extract_features: expected input of length " + std::to_string(input_dim_) +
                     ", got " + std::to_string(raw.size()));
  }
  if (kind_ == ExtractorKind::identity) return {raw.begin(), raw.end()};
  std::vector<double> out(output_dim_);
  for (std::size_t i = 0; i < output_dim_; ++i) {
    auto w = projection_.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < raw.size(); ++j) acc += w[j] * raw[j];
    out[i] = acc > 0.0 ? acc : 0.0;
  }
  return out;
}

std::vector<double> FrozenExtractor::extract(const ImageTensor& merged) const {
  if (kind_ == ExtractorKind::identity) {
    throw ShapeError("extract_features: identity extractor takes precomputed vectors, not images");
  }
  return extract(std::span<const double>(merged.values));
}

std::uint64_t FrozenExtractor::checksum() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  mix(static_cast<std::uint64_t>(kind_));
  mix(input_dim_);
  mix(output_dim_);
  mix(seed_);
  for (double v : projection_.values()) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

}  // namespace openden::data
