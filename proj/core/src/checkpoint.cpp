#include "tcnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "tcnn/data.hpp"

namespace tcnn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'T', 'C', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error("checkpoint: truncated string");
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(kMagic, 4);
  put(f, kVersion);
  put_string(f, ckpt.arch);
  put_string(f, ckpt.dataset);
  put(f, ckpt.seed);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const Tensor& t : ckpt.tensors) {
    put<std::uint32_t>(f, static_cast<std::uint32_t>(t.shape().rank()));
    for (int d : t.shape().dims()) put<std::uint32_t>(f, static_cast<std::uint32_t>(d));
    f.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!f) throw std::runtime_error(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": not a TCNN checkpoint");
  if (get<std::uint32_t>(f) != kVersion) throw std::runtime_error(path + ": unsupported version");

  Checkpoint ckpt;
  ckpt.arch = get_string(f);
  ckpt.dataset = get_string(f);
  ckpt.seed = get<std::uint64_t>(f);
  const auto count = get<std::uint32_t>(f);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rank = get<std::uint32_t>(f);
    std::vector<int> dims;
    for (std::uint32_t a = 0; a < rank; ++a) dims.push_back(static_cast<int>(get<std::uint32_t>(f)));
    Shape shape(dims);
    std::vector<double> data(static_cast<size_t>(shape.elems()));
    f.read(reinterpret_cast<char*>(data.data()),
           static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!f) throw std::runtime_error(path + ": truncated tensor payload");
    ckpt.tensors.emplace_back(std::move(shape), std::move(data));
  }
  return ckpt;
}

Checkpoint snapshot(const std::string& arch, const std::string& dataset, std::uint64_t seed,
                    Network& net) {
  Checkpoint ckpt{arch, dataset, seed, {}};
  for (Tensor* p : net.params()) ckpt.tensors.push_back(*p);
  return ckpt;
}

void restore(const Checkpoint& ckpt, Network& net) {
  auto params = net.params();
  if (params.size() != ckpt.tensors.size())
    throw std::runtime_error("restore: checkpoint has " + std::to_string(ckpt.tensors.size()) +
                             " tensors, network expects " + std::to_string(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != ckpt.tensors[i].shape())
      throw std::runtime_error("restore: tensor " + std::to_string(i) + " shape mismatch");
    *params[i] = ckpt.tensors[i];
  }
}

Network restore_network(const Checkpoint& ckpt) {
  std::mt19937_64 rng(ckpt.seed);
  Network net = build_network(arch_from_name(ckpt.arch), dataset_shape(ckpt.dataset), rng);
  restore(ckpt, net);
  return net;
}

}  // namespace tcnn
