#pragma once

#include <string>

#include "tcnn/tensor.hpp"

namespace tcnn {

/// Binary PPM (P6) -> [H,W,3] tensor with values byte/255. Maxval must be 255.
Tensor read_ppm(const std::string& path);
/// Binary PGM (P5) -> [H,W,1].
Tensor read_pgm(const std::string& path);

/// Quantizes values in [0,1] to bytes (round(v*255), clamped). A tensor read
/// back from read_ppm round-trips byte-identically.
void write_ppm(const Tensor& img, const std::string& path);
void write_pgm(const Tensor& img, const std::string& path);

/// Per-image min-max rescale to [0,1]; a constant image maps to 0.5
/// (mid-gray after quantization). Use before write_* for arbitrary real data.
Tensor rescale_to_unit(const Tensor& img);

}  // namespace tcnn
