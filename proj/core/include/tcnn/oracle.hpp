#pragma once

#include <optional>

#include "tcnn/layers.hpp"
#include "tcnn/tensor.hpp"

// Deliberately naive transcriptions of the layer formulas, used only as test
// oracles. Shares the Tensor/ConvParams types with the production layers but
// none of their computation paths. Intended for small inputs (dims <= 8).
namespace tcnn::oracle {

struct OracleResult {
  Tensor output;
  std::vector<std::int32_t> inner_arg;  // i*k+j per (h,w,d,p); tropical only
  std::vector<std::int32_t> outer_arg;  // d per (h,w,p); outer min/max only
};

/// mode == nullopt selects the standard multiply-accumulate convolution.
OracleResult forward(const Tensor& x, const ConvParams& p, std::optional<TropicalMode> mode);

/// True if any inner or outer reduction has two competitors within tol of the
/// winner (a resample signal for gradient checks).
bool has_ties(const Tensor& x, const ConvParams& p, TropicalMode m, double tol);

struct NumericGrads {
  Tensor dx;
  Tensor dkernel;
  std::optional<Tensor> dbias;
};

/// Central finite differences of sum(dy * forward(x)) with step eps.
NumericGrads grad(const Tensor& x, const ConvParams& p, std::optional<TropicalMode> mode,
                  const Tensor& dy, double eps = 1e-5);

}  // namespace tcnn::oracle
