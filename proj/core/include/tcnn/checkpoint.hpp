#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcnn/network.hpp"
#include "tcnn/tensor.hpp"

namespace tcnn {

/// Little-endian binary checkpoint: magic "TCNN", format version, arch and
/// dataset names, RNG seed, then every parameter tensor (shape + raw f64).
struct Checkpoint {
  std::string arch;
  std::string dataset;
  std::uint64_t seed = 0;
  std::vector<Tensor> tensors;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint snapshot(const std::string& arch, const std::string& dataset, std::uint64_t seed,
                    Network& net);
/// Copies checkpoint tensors into an already-built network of the same arch.
void restore(const Checkpoint& ckpt, Network& net);
/// Builds the network named in the checkpoint and restores its parameters.
Network restore_network(const Checkpoint& ckpt);

}  // namespace tcnn
