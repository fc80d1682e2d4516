#include "openden/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "openden/error.hpp"

namespace openden::model {
namespace {

constexpr char kMagic[4] = {'D', 'E', 'N', '1'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <typename T>
  void uint(T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
    }
  }
  void real(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  const std::uint8_t* take(std::size_t n) {
    if (n > in_.size() - pos_) throw DataError("checkpoint truncated at byte " + std::to_string(pos_));
    const std::uint8_t* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }
  template <typename T>
  T uint() {
    const std::uint8_t* p = take(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return static_cast<T>(v);
  }
  double real() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  bool done() const noexcept { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const DenNetwork& net) {
  const auto state = net.raw_state();
  Writer w;
  w.bytes(kMagic, 4);
  w.uint<std::uint64_t>(state.generation);
  w.uint<std::uint64_t>(state.input_dim);
  w.uint<std::uint64_t>(state.next_id);
  w.uint<std::uint8_t>(state.options.connect_all_outputs ? 1 : 0);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(state.layers.size()));
  for (const auto& layer : state.layers) {
    w.uint<std::uint64_t>(layer.width());
    for (NeuronId id : layer.neuron_ids) w.uint<std::uint64_t>(id);
    for (std::size_t b : layer.birth_task) w.uint<std::uint64_t>(b);
    std::vector<std::uint8_t> packed((layer.edge_mask.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < layer.edge_mask.size(); ++i) {
      if (layer.edge_mask[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    w.bytes(packed.data(), packed.size());
    for (double v : layer.weights.values()) w.real(v);
    for (double v : layer.biases) w.real(v);
  }
  std::ostringstream rng;
  rng << state.rng;
  const std::string text = rng.str();
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());
  return w.take();
}

DenNetwork decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (std::memcmp(r.take(4), kMagic, 4) != 0) throw DataError("checkpoint: bad magic (expected DEN1)");
  DenNetwork::RawState state;
  state.generation = r.uint<std::uint64_t>();
  state.input_dim = r.uint<std::uint64_t>();
  state.next_id = r.uint<std::uint64_t>();
  state.options.connect_all_outputs = r.uint<std::uint8_t>() != 0;
  const auto layer_count = r.uint<std::uint32_t>();
  if (layer_count < 2) throw DataError("checkpoint: need at least two layers");
  std::size_t fan_in = state.input_dim;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    LayerState layer;
    const auto n = static_cast<std::size_t>(r.uint<std::uint64_t>());
    for (std::size_t i = 0; i < n; ++i) layer.neuron_ids.push_back(r.uint<std::uint64_t>());
    for (std::size_t i = 0; i < n; ++i) {
      layer.birth_task.push_back(static_cast<std::size_t>(r.uint<std::uint64_t>()));
    }
    const std::size_t entries = n * fan_in;
    const std::uint8_t* packed = r.take((entries + 7) / 8);
    layer.edge_mask.resize(entries);
    for (std::size_t i = 0; i < entries; ++i) layer.edge_mask[i] = (packed[i / 8] >> (i % 8)) & 1u;
    layer.weights = Matrix(n, fan_in);
    for (double& v : layer.weights.values()) v = r.real();
    layer.biases.resize(n);
    for (double& v : layer.biases) v = r.real();
    state.layers.push_back(std::move(layer));
    fan_in = n;
  }
  const auto rng_len = r.uint<std::uint32_t>();
  const std::uint8_t* text = r.take(rng_len);
  std::istringstream rng(std::string(reinterpret_cast<const char*>(text), rng_len));
  rng >> state.rng;
  if (rng.fail()) throw DataError("checkpoint: unreadable generator state");
  if (!r.done()) throw DataError("checkpoint: trailing bytes");
  return DenNetwork::from_raw_state(std::move(state));
}

void save_checkpoint(const DenNetwork& net, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

DenNetwork load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace openden::model
