#include "openden/data/image.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "openden/error.hpp"

namespace openden::data {
namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(const std::vector<char>& buf, std::size_t& pos) {
  for (;;) {
    while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos])) && buf[pos] != '#') {
    tok.push_back(buf[pos++]);
  }
  return tok;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) { return IoError("unparseable image " + path.string() + ": " + why); };

  if (header_token(buf, pos) != "P5") throw fail("not a binary PGM (P5)");
  std::size_t vals[3];
  for (auto& v : vals) {
    const std::string tok = header_token(buf, pos);
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
      throw fail("bad header field '" + tok + "'");
    }
    v = std::stoul(tok);
  }
  if (vals[2] != 255) throw fail("maxval must be 255");
  if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos]))) {
    throw fail("missing separator after header");
  }
  ++pos;
  GrayImage img(vals[0], vals[1]);
  if (buf.size() - pos < img.pixels.size()) throw fail("truncated pixel data");
  std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(pos), img.pixels.size(), img.pixels.begin());
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("failed writing image " + path.string());
}

ViewTriplet read_view_triplet(const std::filesystem::path& prefix) {
  ViewTriplet t;
  for (std::size_t v = 0; v < 3; ++v) {
    t.views[v] = read_pgm(prefix.string() + "_v" + std::to_string(v) + ".pgm");
  }
  return t;
}

ImageTensor merge_views(const ViewTriplet& triplet) {
  for (const auto& v : triplet.views) {
    if (v.width != kViewSize || v.height != kViewSize || v.pixels.size() != kViewSize * kViewSize) {
      throw ShapeError("merge_views: every view must be 128x128, got " + std::to_string(v.width) +
                       "x" + std::to_string(v.height));
    }
  }
  ImageTensor t;
  t.height = kViewSize;
  t.width = kViewSize;
  t.values.reserve(kMergedLength);
  for (const auto& v : triplet.views) {
    for (std::uint8_t p : v.pixels) t.values.push_back(static_cast<double>(p) / 255.0);
  }
  return t;
}

}  // namespace openden::data
