#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tcnn/tensor.hpp"

namespace tcnn {

/// Immutable image classification split. Pixels are kept as raw bytes and
/// materialized to [0,1] tensors per sample.
class Dataset {
public:
  Dataset(Shape image_shape, std::vector<std::uint8_t> pixels,
          std::vector<std::uint8_t> labels, std::string split);

  int size() const { return static_cast<int>(labels_.size()); }
  const Shape& image_shape() const { return image_shape_; }
  const std::string& split() const { return split_; }

  Tensor image(int i) const;  // [H,W,C], pixel/255
  int label(int i) const { return labels_[static_cast<size_t>(i)]; }

private:
  Shape image_shape_;
  std::vector<std::uint8_t> pixels_;
  std::vector<std::uint8_t> labels_;
  std::string split_;
};

/// Parses the big-endian IDX pairs (magic 2051/2049) from dir:
/// train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-*.
std::pair<Dataset, Dataset> load_mnist(const std::string& dir);

/// Parses data_batch_{1..5}.bin and test_batch.bin (3073-byte records,
/// channel-planar RGB) from dir.
std::pair<Dataset, Dataset> load_cifar10(const std::string& dir);

std::pair<Dataset, Dataset> load_dataset(const std::string& name, const std::string& data_dir);
Shape dataset_shape(const std::string& name);

enum class NoiseKind { Noise1, Noise2, Noise3, Noise4 };

std::string noise_name(NoiseKind k);
NoiseKind noise_from_name(const std::string& name);

/// Noise1/2: N(0,1)*sigma (0.01 / 0.1) added i.i.d. to every element.
/// Noise3: one square block of ~5% pixel area (side round(sqrt(0.05*H*W)),
/// uniform position) gets N(0,1)*0.1 per element.
/// Noise4: round(0.05*H*W) pixel positions without replacement get
/// N(0,1)*0.1 at every channel. Output is not clamped.
Tensor apply_noise(const Tensor& img, NoiseKind kind, std::mt19937_64& rng);

/// Pixel count perturbed by Noise4 on an HxW image.
int noise4_pixel_count(int h, int w);
/// Block side used by Noise3 on an HxW image.
int noise3_block_side(int h, int w);

}  // namespace tcnn
