#include "tcnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tcnn {

Dataset::Dataset(Shape image_shape, std::vector<std::uint8_t> pixels,
                 std::vector<std::uint8_t> labels, std::string split)
    : image_shape_(std::move(image_shape)),
      pixels_(std::move(pixels)),
      labels_(std::move(labels)),
      split_(std::move(split)) {
  if (image_shape_.rank() != 3) throw std::invalid_argument("Dataset: image shape must be [H,W,C]");
  if (pixels_.size() != labels_.size() * static_cast<size_t>(image_shape_.elems()))
    throw std::invalid_argument("Dataset: pixel buffer does not match count " +
                                std::to_string(labels_.size()));
  for (std::uint8_t l : labels_)
    if (l > 9) throw std::invalid_argument("Dataset: label out of range [0,9]");
}

Tensor Dataset::image(int i) const {
  if (i < 0 || i >= size()) throw std::out_of_range("Dataset::image: index out of range");
  const std::int64_t n = image_shape_.elems();
  Tensor t(image_shape_);
  const std::uint8_t* src = pixels_.data() + static_cast<std::int64_t>(i) * n;
  for (std::int64_t j = 0; j < n; ++j) t[j] = src[j] / 255.0;
  return t;
}

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, size_t off) {
  if (off + 4 > b.size()) throw std::runtime_error("truncated IDX header");
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path,
                      const std::string& split) {
  auto img = read_file(images_path);
  auto lab = read_file(labels_path);

  if (be32(img, 0) != 2051) throw std::runtime_error(images_path + ": bad magic (expected 2051)");
  if (be32(lab, 0) != 2049) throw std::runtime_error(labels_path + ": bad magic (expected 2049)");

  const std::uint32_t n = be32(img, 4);
  const std::uint32_t rows = be32(img, 8);
  const std::uint32_t cols = be32(img, 12);
  if (be32(lab, 4) != n)
    throw std::runtime_error(labels_path + ": label count does not match image count");
  if (img.size() != 16 + static_cast<size_t>(n) * rows * cols)
    throw std::runtime_error(images_path + ": truncated image payload");
  if (lab.size() != 8 + n) throw std::runtime_error(labels_path + ": truncated label payload");

  return Dataset(Shape{static_cast<int>(rows), static_cast<int>(cols), 1},
                 std::vector<std::uint8_t>(img.begin() + 16, img.end()),
                 std::vector<std::uint8_t>(lab.begin() + 8, lab.end()), split);
}

}  // namespace

std::pair<Dataset, Dataset> load_mnist(const std::string& dir) {
  return {load_idx_pair(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte", "train"),
          load_idx_pair(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte", "test")};
}

namespace {

constexpr int kCifarRecord = 3073;  // 1 label byte + 3x1024 channel planes

void append_cifar_batch(const std::string& path, std::vector<std::uint8_t>& pixels,
                        std::vector<std::uint8_t>& labels) {
  auto raw = read_file(path);
  if (raw.empty() || raw.size() % kCifarRecord != 0)
    throw std::runtime_error(path + ": size is not a multiple of 3073");
  const size_t n = raw.size() / kCifarRecord;
  for (size_t r = 0; r < n; ++r) {
    const std::uint8_t* rec = raw.data() + r * kCifarRecord;
    labels.push_back(rec[0]);
    // channel-planar (R plane, G plane, B plane) -> interleaved H,W,C
    for (int px = 0; px < 1024; ++px)
      for (int c = 0; c < 3; ++c) pixels.push_back(rec[1 + c * 1024 + px]);
  }
}

}  // namespace

std::pair<Dataset, Dataset> load_cifar10(const std::string& dir) {
  std::vector<std::uint8_t> train_px, train_lab;
  for (int b = 1; b <= 5; ++b)
    append_cifar_batch(dir + "/data_batch_" + std::to_string(b) + ".bin", train_px, train_lab);
  std::vector<std::uint8_t> test_px, test_lab;
  append_cifar_batch(dir + "/test_batch.bin", test_px, test_lab);
  return {Dataset(Shape{32, 32, 3}, std::move(train_px), std::move(train_lab), "train"),
          Dataset(Shape{32, 32, 3}, std::move(test_px), std::move(test_lab), "test")};
}

std::pair<Dataset, Dataset> load_dataset(const std::string& name, const std::string& data_dir) {
  if (name == "mnist") return load_mnist(data_dir + "/mnist");
  if (name == "cifar10") return load_cifar10(data_dir + "/cifar10");
  throw std::invalid_argument("unknown dataset: " + name + " (expected mnist or cifar10)");
}

Shape dataset_shape(const std::string& name) {
  if (name == "mnist") return Shape{28, 28, 1};
  if (name == "cifar10") return Shape{32, 32, 3};
  throw std::invalid_argument("unknown dataset: " + name);
}

std::string noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::Noise1: return "noise1";
    case NoiseKind::Noise2: return "noise2";
    case NoiseKind::Noise3: return "noise3";
    case NoiseKind::Noise4: return "noise4";
  }
  throw std::invalid_argument("noise_name: bad enum");
}

NoiseKind noise_from_name(const std::string& name) {
  for (NoiseKind k : {NoiseKind::Noise1, NoiseKind::Noise2, NoiseKind::Noise3, NoiseKind::Noise4})
    if (noise_name(k) == name) return k;
  throw std::invalid_argument("unknown noise kind: " + name);
}

int noise4_pixel_count(int h, int w) {
  return static_cast<int>(std::lround(0.05 * h * w));
}

int noise3_block_side(int h, int w) {
  return static_cast<int>(std::lround(std::sqrt(0.05 * h * w)));
}

Tensor apply_noise(const Tensor& img, NoiseKind kind, std::mt19937_64& rng) {
  if (img.shape().rank() != 3) throw std::invalid_argument("apply_noise: expected [H,W,C]");
  const int H = img.shape()[0], W = img.shape()[1], C = img.shape()[2];
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor out = img;

  switch (kind) {
    case NoiseKind::Noise1:
    case NoiseKind::Noise2: {
      const double sigma = kind == NoiseKind::Noise1 ? 0.01 : 0.1;
      for (std::int64_t i = 0; i < out.size(); ++i) out[i] += normal(rng) * sigma;
      break;
    }
    case NoiseKind::Noise3: {
      const int side = noise3_block_side(H, W);
      if (side < 1 || side > H || side > W)
        throw std::invalid_argument("apply_noise: image too small for a 5% block");
      std::uniform_int_distribution<int> row(0, H - side), col(0, W - side);
      const int r0 = row(rng), c0 = col(rng);
      for (int r = r0; r < r0 + side; ++r)
        for (int c = c0; c < c0 + side; ++c)
          for (int ch = 0; ch < C; ++ch)
            out[(static_cast<std::int64_t>(r) * W + c) * C + ch] += normal(rng) * 0.1;
      break;
    }
    case NoiseKind::Noise4: {
      const int want = noise4_pixel_count(H, W);
      std::vector<int> idx(static_cast<size_t>(H) * W);
      for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
      // partial Fisher-Yates: first `want` entries are a uniform sample
      for (int i = 0; i < want; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(idx.size()) - 1);
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(pick(rng))]);
      }
      for (int i = 0; i < want; ++i)
        for (int ch = 0; ch < C; ++ch)
          out[static_cast<std::int64_t>(idx[static_cast<size_t>(i)]) * C + ch] += normal(rng) * 0.1;
      break;
    }
  }
  return out;
}

}  // namespace tcnn
