#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "openden/data/image.hpp"
#include "openden/numerics/matrix.hpp"

namespace openden::data {

// Feature file: "FVEC", u32 little-endian dimension, dimension x f32 little-endian.
std::vector<double> read_fvec(const std::filesystem::path& path);
void write_fvec(const std::filesystem::path& path, std::span<const double> values);
std::vector<std::uint8_t> encode_fvec(std::span<const double> values);

enum class ExtractorKind { identity, projection };

// The frozen backbone in front of the classifier head. Parameters are fixed
// at construction and never change.
class FrozenExtractor {
 public:
  static FrozenExtractor identity(std::size_t dim);
  // Seeded Gaussian matrix scaled by 1/sqrt(input_dim), followed by ReLU.
  static FrozenExtractor projection(std::size_t output_dim, std::uint64_t seed,
                                    std::size_t input_dim = kMergedLength);

  ExtractorKind kind() const noexcept { return kind_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::vector<double> extract(std::span<const double> raw) const;
  std::vector<double> extract(const ImageTensor& merged) const;

  // FNV-1a over the parameter bytes.
  std::uint64_t checksum() const noexcept;

 private:
  FrozenExtractor() = default;

  ExtractorKind kind_ = ExtractorKind::identity;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::uint64_t seed_ = 0;
  numerics::Matrix projection_;
};

}  // namespace openden::data
