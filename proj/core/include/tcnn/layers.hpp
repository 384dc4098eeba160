#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "tcnn/tensor.hpp"

namespace tcnn {

/// Inner reduction over the kernel window of elementwise input+kernel sums.
enum class InnerOp { MinPlus, MaxPlus };
/// Outer reduction across input channels of the inner results.
enum class OuterOp { Sum, Max, Min };

/// One of the six tropical layer kinds: (inner, outer).
struct TropicalMode {
  InnerOp inner;
  OuterOp outer;
  bool operator==(const TropicalMode&) const = default;
};

inline constexpr TropicalMode kMinPS{InnerOp::MinPlus, OuterOp::Sum};
inline constexpr TropicalMode kMaxPS{InnerOp::MaxPlus, OuterOp::Sum};
inline constexpr TropicalMode kMinPMax{InnerOp::MinPlus, OuterOp::Max};
inline constexpr TropicalMode kMaxPMax{InnerOp::MaxPlus, OuterOp::Max};
inline constexpr TropicalMode kMinPMin{InnerOp::MinPlus, OuterOp::Min};
inline constexpr TropicalMode kMaxPMin{InnerOp::MaxPlus, OuterOp::Min};

constexpr std::array<TropicalMode, 6> all_tropical_modes() {
  return {kMinPS, kMaxPS, kMinPMax, kMaxPMax, kMinPMin, kMaxPMin};
}

std::string mode_name(TropicalMode m);          // "MinP-S", "MaxP-Min", ...
TropicalMode mode_from_name(const std::string& name);

/// Tally of floating-point work. Comparisons count pairwise min/max decisions.
struct OpCounter {
  std::uint64_t mults = 0;
  std::uint64_t adds = 0;
  std::uint64_t comparisons = 0;

  OpCounter& operator+=(const OpCounter& o) {
    mults += o.mults;
    adds += o.adds;
    comparisons += o.comparisons;
    return *this;
  }
  bool operator==(const OpCounter&) const = default;
};

struct ConvParams {
  Tensor kernel;  // [k, k, C_in, C_out]
  int stride = 1;
  PadSpec pad;
  std::optional<Tensor> bias;  // [C_out]

  int kernel_size() const { return kernel.shape()[0]; }
  int in_channels() const { return kernel.shape()[2]; }
  int out_channels() const { return kernel.shape()[3]; }
  void validate() const;
};

/// Everything backward needs: the input snapshot plus, for tropical layers,
/// the winning window cell per (h,w,d,p) and the winning channel per (h,w,p)
/// when the outer reduction is min/max.
struct ForwardCache {
  Tensor input;
  Shape out_shape;
  std::vector<std::int32_t> inner_arg;  // i*k+j, indexed [h][w][d][p]
  std::vector<std::int32_t> outer_arg;  // d, indexed [h][w][p]
};

struct ConvGrads {
  Tensor dx;
  Tensor dkernel;
  std::optional<Tensor> dbias;
};

Shape conv_out_shape(const Shape& in, const ConvParams& p);

std::pair<Tensor, ForwardCache> tropical_conv_forward(const Tensor& x, const ConvParams& p,
                                                      TropicalMode m, OpCounter* ops = nullptr);
ConvGrads tropical_conv_backward(const Tensor& dy, const ForwardCache& cache,
                                 const ConvParams& p, TropicalMode m);

std::pair<Tensor, ForwardCache> standard_conv_forward(const Tensor& x, const ConvParams& p,
                                                      OpCounter* ops = nullptr);
ConvGrads standard_conv_backward(const Tensor& dy, const ForwardCache& cache, const ConvParams& p);

/// Closed-form op counts for one forward pass (valid or value padding).
OpCounter tropical_conv_op_count(const Shape& in, const ConvParams& p, TropicalMode m);
OpCounter standard_conv_op_count(const Shape& in, const ConvParams& p);
OpCounter dense_op_count(int in_features, int out_features);

// Dense: y = W x + b with W [out, in].
struct DenseCache {
  Tensor input;  // flat [in]
};
std::pair<Tensor, DenseCache> dense_forward(const Tensor& x, const Tensor& weight,
                                            const Tensor& bias, OpCounter* ops = nullptr);
struct DenseGrads {
  Tensor dx;
  Tensor dweight;
  Tensor dbias;
};
DenseGrads dense_backward(const Tensor& dy, const DenseCache& cache, const Tensor& weight);

// Flatten: reshape preserving row-major order.
Tensor flatten_forward(const Tensor& x);
Tensor flatten_backward(const Tensor& dy, const Shape& input_shape);

}  // namespace tcnn
