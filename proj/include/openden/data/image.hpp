#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace openden::data {

inline constexpr std::size_t kViewSize = 128;
inline constexpr std::size_t kMergedLength = 3 * kViewSize * kViewSize;  // 49152

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(w * h, fill) {}
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
};

// Binary PGM (P5), maxval 255 only. Comments in the header are skipped.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

struct ViewTriplet {
  std::array<GrayImage, 3> views;
};

// Reads <prefix>_v0.pgm, <prefix>_v1.pgm, <prefix>_v2.pgm.
ViewTriplet read_view_triplet(const std::filesystem::path& prefix);

// Channel-major 3 x H x W tensor with values in [0, 1].
struct ImageTensor {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
};

// Channel c is view c divided by 255. All three views must be 128 x 128.
ImageTensor merge_views(const ViewTriplet& triplet);

}  // namespace openden::data
