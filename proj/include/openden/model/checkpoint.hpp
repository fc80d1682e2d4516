#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "openden/model/network.hpp"

namespace openden::model {

// Binary checkpoint, all integers and reals little-endian:
//
//   "DEN1"
//   u64 generation, u64 input_dim, u64 next_neuron_id, u8 connect_all_outputs
//   u32 layer_count (hidden layers followed by the output layer)
//   per layer:
//     u64 neuron_count
//     u64 neuron_ids[neuron_count]
//     u64 birth_task[neuron_count]
//     edge_mask: neuron_count * fan_in bits, row-major, LSB first, zero padded to a byte
//     f64 weights[neuron_count * fan_in], row-major
//     f64 biases[neuron_count]
//   u32 rng_state_length, rng state text (std::mt19937_64 stream form)
//
// fan_in of layer 0 is input_dim, of layer l the neuron_count of layer l-1.
std::vector<std::uint8_t> encode_checkpoint(const DenNetwork& net);
DenNetwork decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const DenNetwork& net, const std::filesystem::path& path);
DenNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace openden::model
