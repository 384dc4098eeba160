#include "tcnn/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace tcnn {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw std::runtime_error("malformed PNM header: unexpected end of file");
  return tok;
}

Tensor read_pnm(const std::string& path, const std::string& magic, int channels) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  if (next_token(f) != magic) throw std::runtime_error(path + ": expected " + magic);
  const int w = std::stoi(next_token(f));
  const int h = std::stoi(next_token(f));
  const int maxval = std::stoi(next_token(f));
  if (w < 1 || h < 1) throw std::runtime_error(path + ": bad dimensions");
  if (maxval != 255) throw std::runtime_error(path + ": maxval must be 255, got " + std::to_string(maxval));
  // the single whitespace byte after maxval was already consumed by next_token

  const std::int64_t n = static_cast<std::int64_t>(h) * w * channels;
  std::vector<unsigned char> raw(static_cast<size_t>(n));
  f.read(reinterpret_cast<char*>(raw.data()), n);
  if (f.gcount() != n) throw std::runtime_error(path + ": truncated pixel data");

  Tensor t(Shape{h, w, channels});
  for (std::int64_t i = 0; i < n; ++i) t[i] = raw[static_cast<size_t>(i)] / 255.0;
  return t;
}

void write_pnm(const Tensor& img, const std::string& path, const std::string& magic, int channels) {
  if (img.shape().rank() != 3 || img.shape()[2] != channels)
    throw std::invalid_argument(path + ": expected [H,W," + std::to_string(channels) + "] tensor, got " +
                                img.shape().str());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << magic << "\n" << img.shape()[1] << " " << img.shape()[0] << "\n255\n";
  for (std::int64_t i = 0; i < img.size(); ++i) {
    double v = std::clamp(img[i], 0.0, 1.0);
    f.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  if (!f) throw std::runtime_error(path + ": write failed");
}

}  // namespace

Tensor read_ppm(const std::string& path) { return read_pnm(path, "P6", 3); }
Tensor read_pgm(const std::string& path) { return read_pnm(path, "P5", 1); }

void write_ppm(const Tensor& img, const std::string& path) { write_pnm(img, path, "P6", 3); }
void write_pgm(const Tensor& img, const std::string& path) { write_pnm(img, path, "P5", 1); }

Tensor rescale_to_unit(const Tensor& img) {
  double lo = img[0], hi = img[0];
  for (std::int64_t i = 1; i < img.size(); ++i) {
    lo = std::min(lo, img[i]);
    hi = std::max(hi, img[i]);
  }
  Tensor out(img.shape());
  if (hi == lo) {
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = 0.5;
  } else {
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = (img[i] - lo) / (hi - lo);
  }
  return out;
}

}  // namespace tcnn
