#include "tcnn/layers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcnn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConvGeom {
  int H, W, Cin, k, Cout, stride, pad;
  int Hout, Wout;
};

ConvGeom geometry(const Shape& in, const ConvParams& p) {
  if (in.rank() != 3) throw std::invalid_argument("conv: expected [H,W,C] input, got " + in.str());
  p.validate();
  if (in[2] != p.in_channels())
    throw std::invalid_argument("conv: input has " + std::to_string(in[2]) +
                                " channels, kernel expects " + std::to_string(p.in_channels()));
  ConvGeom g;
  g.H = in[0];
  g.W = in[1];
  g.Cin = in[2];
  g.k = p.kernel_size();
  g.Cout = p.out_channels();
  g.stride = p.stride;
  g.pad = p.pad.kind == PadSpec::Kind::None ? 0 : p.pad.amount;
  g.Hout = conv_out_extent(g.H, g.k, g.stride, g.pad);
  g.Wout = conv_out_extent(g.W, g.k, g.stride, g.pad);
  return g;
}

}  // namespace

std::string mode_name(TropicalMode m) {
  std::string s = m.inner == InnerOp::MinPlus ? "MinP-" : "MaxP-";
  switch (m.outer) {
    case OuterOp::Sum: return s + "S";
    case OuterOp::Max: return s + "Max";
    case OuterOp::Min: return s + "Min";
  }
  return s;
}

TropicalMode mode_from_name(const std::string& name) {
  for (TropicalMode m : all_tropical_modes())
    if (mode_name(m) == name) return m;
  throw std::invalid_argument("unknown tropical mode: " + name);
}

void ConvParams::validate() const {
  if (kernel.shape().rank() != 4)
    throw std::invalid_argument("ConvParams: kernel must be [k,k,C_in,C_out], got " + kernel.shape().str());
  if (kernel.shape()[0] != kernel.shape()[1])
    throw std::invalid_argument("ConvParams: kernel must be square");
  if (stride < 1) throw std::invalid_argument("ConvParams: stride must be >= 1");
  if (pad.kind != PadSpec::Kind::None && pad.amount < 0)
    throw std::invalid_argument("ConvParams: pad amount must be >= 0");
  if (bias && (bias->shape().rank() != 1 || bias->shape()[0] != out_channels()))
    throw std::invalid_argument("ConvParams: bias must be [C_out]");
}

Shape conv_out_shape(const Shape& in, const ConvParams& p) {
  ConvGeom g = geometry(in, p);
  return Shape{g.Hout, g.Wout, g.Cout};
}

std::pair<Tensor, ForwardCache> tropical_conv_forward(const Tensor& x, const ConvParams& p,
                                                      TropicalMode m, OpCounter* ops) {
  ConvGeom g = geometry(x.shape(), p);
  if (!x.all_finite()) throw std::invalid_argument("tropical_conv_forward: non-finite input");

  const bool inner_min = m.inner == InnerOp::MinPlus;
  const bool value_pad = p.pad.kind == PadSpec::Kind::Value;

  Tensor y(Shape{g.Hout, g.Wout, g.Cout});
  ForwardCache cache;
  cache.input = x;
  cache.out_shape = y.shape();
  cache.inner_arg.assign(static_cast<size_t>(g.Hout) * g.Wout * g.Cin * g.Cout, -1);
  if (m.outer != OuterOp::Sum)
    cache.outer_arg.assign(static_cast<size_t>(g.Hout) * g.Wout * g.Cout, -1);

  const double* X = x.data();
  const double* K = p.kernel.data();
  const std::int64_t kstr_i = static_cast<std::int64_t>(g.k) * g.Cin * g.Cout;
  const std::int64_t kstr_j = static_cast<std::int64_t>(g.Cin) * g.Cout;

  std::uint64_t n_adds = 0, n_cmps = 0;

  for (int oh = 0; oh < g.Hout; ++oh) {
    const int h0 = oh * g.stride - g.pad;
    for (int ow = 0; ow < g.Wout; ++ow) {
      const int w0 = ow * g.stride - g.pad;
      const bool interior = h0 >= 0 && w0 >= 0 && h0 + g.k <= g.H && w0 + g.k <= g.W;
      for (int pch = 0; pch < g.Cout; ++pch) {
        double acc = m.outer == OuterOp::Sum ? 0.0 : (m.outer == OuterOp::Max ? -kInf : kInf);
        int acc_d = -1;
        for (int d = 0; d < g.Cin; ++d) {
          double best = inner_min ? kInf : -kInf;
          int best_ij = -1;
          int cells = 0;
          for (int i = 0; i < g.k; ++i) {
            const int ih = h0 + i;
            if (!interior && (ih < 0 || ih >= g.H) && !value_pad) continue;
            for (int j = 0; j < g.k; ++j) {
              const int iw = w0 + j;
              double xv;
              if (interior || (ih >= 0 && ih < g.H && iw >= 0 && iw < g.W)) {
                xv = X[(static_cast<std::int64_t>(ih) * g.W + iw) * g.Cin + d];
              } else if (value_pad) {
                xv = p.pad.value;
              } else {
                continue;  // identity padding: the cell never wins
              }
              const double s = xv + K[i * kstr_i + j * kstr_j + static_cast<std::int64_t>(d) * g.Cout + pch];
              ++cells;
              if (best_ij < 0 || (inner_min ? s < best : s > best)) {
                best = s;
                best_ij = i * g.k + j;
              }
            }
          }
          if (best_ij < 0)
            throw std::invalid_argument("tropical_conv_forward: window reduced over no cells");
          n_adds += static_cast<std::uint64_t>(cells);
          n_cmps += static_cast<std::uint64_t>(cells - 1);
          cache.inner_arg[((static_cast<size_t>(oh) * g.Wout + ow) * g.Cin + d) * g.Cout + pch] = best_ij;

          switch (m.outer) {
            case OuterOp::Sum:
              acc += best;
              break;
            case OuterOp::Max:
              if (acc_d >= 0) ++n_cmps;
              if (acc_d < 0 || best > acc) { acc = best; acc_d = d; }
              break;
            case OuterOp::Min:
              if (acc_d >= 0) ++n_cmps;
              if (acc_d < 0 || best < acc) { acc = best; acc_d = d; }
              break;
          }
        }
        if (m.outer != OuterOp::Sum)
          cache.outer_arg[(static_cast<size_t>(oh) * g.Wout + ow) * g.Cout + pch] = acc_d;
        if (p.bias) {
          acc += (*p.bias)[pch];
          ++n_adds;
        }
        if (!std::isfinite(acc))
          throw std::runtime_error("tropical_conv_forward: non-finite output at (" +
                                   std::to_string(oh) + "," + std::to_string(ow) + "," +
                                   std::to_string(pch) + ")");
        y[(static_cast<std::int64_t>(oh) * g.Wout + ow) * g.Cout + pch] = acc;
      }
    }
  }

  if (ops) {
    ops->adds += n_adds;
    ops->comparisons += n_cmps;
  }
  return {std::move(y), std::move(cache)};
}

ConvGrads tropical_conv_backward(const Tensor& dy, const ForwardCache& cache, const ConvParams& p,
                                 TropicalMode m) {
  ConvGeom g = geometry(cache.input.shape(), p);
  if (dy.shape() != cache.out_shape || dy.shape() != Shape{g.Hout, g.Wout, g.Cout})
    throw std::invalid_argument("tropical_conv_backward: dy shape mismatch");
  if (cache.inner_arg.size() != static_cast<size_t>(g.Hout) * g.Wout * g.Cin * g.Cout)
    throw std::invalid_argument("tropical_conv_backward: cache/param mismatch");
  if (m.outer != OuterOp::Sum && cache.outer_arg.size() != static_cast<size_t>(g.Hout) * g.Wout * g.Cout)
    throw std::invalid_argument("tropical_conv_backward: cache/param mismatch (outer)");

  ConvGrads out;
  out.dx = zeros(cache.input.shape());
  out.dkernel = zeros(p.kernel.shape());
  if (p.bias) out.dbias = zeros(p.bias->shape());

  const std::int64_t kstr_i = static_cast<std::int64_t>(g.k) * g.Cin * g.Cout;
  const std::int64_t kstr_j = static_cast<std::int64_t>(g.Cin) * g.Cout;

  for (int oh = 0; oh < g.Hout; ++oh) {
    const int h0 = oh * g.stride - g.pad;
    for (int ow = 0; ow < g.Wout; ++ow) {
      const int w0 = ow * g.stride - g.pad;
      for (int pch = 0; pch < g.Cout; ++pch) {
        const double gup = dy[(static_cast<std::int64_t>(oh) * g.Wout + ow) * g.Cout + pch];
        if (out.dbias) (*out.dbias)[pch] += gup;
        if (gup == 0.0) continue;

        const auto route = [&](int d) {
          const int ij = cache.inner_arg[((static_cast<size_t>(oh) * g.Wout + ow) * g.Cin + d) * g.Cout + pch];
          const int i = ij / g.k, j = ij % g.k;
          out.dkernel[i * kstr_i + j * kstr_j + static_cast<std::int64_t>(d) * g.Cout + pch] += gup;
          const int ih = h0 + i, iw = w0 + j;
          if (ih >= 0 && ih < g.H && iw >= 0 && iw < g.W)
            out.dx[(static_cast<std::int64_t>(ih) * g.W + iw) * g.Cin + d] += gup;
        };

        if (m.outer == OuterOp::Sum) {
          for (int d = 0; d < g.Cin; ++d) route(d);
        } else {
          route(cache.outer_arg[(static_cast<size_t>(oh) * g.Wout + ow) * g.Cout + pch]);
        }
      }
    }
  }
  return out;
}

std::pair<Tensor, ForwardCache> standard_conv_forward(const Tensor& x, const ConvParams& p,
                                                      OpCounter* ops) {
  ConvGeom g = geometry(x.shape(), p);
  if (!x.all_finite()) throw std::invalid_argument("standard_conv_forward: non-finite input");
  if (!p.bias) throw std::invalid_argument("standard_conv_forward: bias is required");
  if (p.pad.kind == PadSpec::Kind::Identity)
    throw std::invalid_argument("standard_conv_forward: identity padding is a tropical notion; use value 0");

  Tensor y(Shape{g.Hout, g.Wout, g.Cout});
  ForwardCache cache;
  cache.input = x;
  cache.out_shape = y.shape();

  const double* X = x.data();
  const double* K = p.kernel.data();
  const std::int64_t kstr_i = static_cast<std::int64_t>(g.k) * g.Cin * g.Cout;
  const std::int64_t kstr_j = static_cast<std::int64_t>(g.Cin) * g.Cout;

  std::uint64_t n_mults = 0, n_adds = 0;

  for (int oh = 0; oh < g.Hout; ++oh) {
    const int h0 = oh * g.stride - g.pad;
    for (int ow = 0; ow < g.Wout; ++ow) {
      const int w0 = ow * g.stride - g.pad;
      const bool interior = h0 >= 0 && w0 >= 0 && h0 + g.k <= g.H && w0 + g.k <= g.W;
      for (int pch = 0; pch < g.Cout; ++pch) {
        double acc = 0.0;
        for (int i = 0; i < g.k; ++i) {
          const int ih = h0 + i;
          for (int j = 0; j < g.k; ++j) {
            const int iw = w0 + j;
            for (int d = 0; d < g.Cin; ++d) {
              double xv;
              if (interior || (ih >= 0 && ih < g.H && iw >= 0 && iw < g.W))
                xv = X[(static_cast<std::int64_t>(ih) * g.W + iw) * g.Cin + d];
              else
                xv = p.pad.value;
              acc += xv * K[i * kstr_i + j * kstr_j + static_cast<std::int64_t>(d) * g.Cout + pch];
            }
          }
        }
        const std::uint64_t n = static_cast<std::uint64_t>(g.k) * g.k * g.Cin;
        n_mults += n;
        n_adds += n;  // n-1 accumulations plus the bias add
        acc += (*p.bias)[pch];
        y[(static_cast<std::int64_t>(oh) * g.Wout + ow) * g.Cout + pch] = acc;
      }
    }
  }

  if (!y.all_finite()) throw std::runtime_error("standard_conv_forward: non-finite output");
  if (ops) {
    ops->mults += n_mults;
    ops->adds += n_adds;
  }
  return {std::move(y), std::move(cache)};
}

ConvGrads standard_conv_backward(const Tensor& dy, const ForwardCache& cache, const ConvParams& p) {
  ConvGeom g = geometry(cache.input.shape(), p);
  if (dy.shape() != cache.out_shape || dy.shape() != Shape{g.Hout, g.Wout, g.Cout})
    throw std::invalid_argument("standard_conv_backward: dy shape mismatch");

  ConvGrads out;
  out.dx = zeros(cache.input.shape());
  out.dkernel = zeros(p.kernel.shape());
  out.dbias = zeros(p.bias->shape());

  const double* X = cache.input.data();
  const double* K = p.kernel.data();
  const std::int64_t kstr_i = static_cast<std::int64_t>(g.k) * g.Cin * g.Cout;
  const std::int64_t kstr_j = static_cast<std::int64_t>(g.Cin) * g.Cout;

  for (int oh = 0; oh < g.Hout; ++oh) {
    const int h0 = oh * g.stride - g.pad;
    for (int ow = 0; ow < g.Wout; ++ow) {
      const int w0 = ow * g.stride - g.pad;
      for (int pch = 0; pch < g.Cout; ++pch) {
        const double gup = dy[(static_cast<std::int64_t>(oh) * g.Wout + ow) * g.Cout + pch];
        (*out.dbias)[pch] += gup;
        if (gup == 0.0) continue;
        for (int i = 0; i < g.k; ++i) {
          const int ih = h0 + i;
          for (int j = 0; j < g.k; ++j) {
            const int iw = w0 + j;
            const bool inside = ih >= 0 && ih < g.H && iw >= 0 && iw < g.W;
            for (int d = 0; d < g.Cin; ++d) {
              const std::int64_t ko = i * kstr_i + j * kstr_j + static_cast<std::int64_t>(d) * g.Cout + pch;
              const double xv = inside ? X[(static_cast<std::int64_t>(ih) * g.W + iw) * g.Cin + d]
                                       : p.pad.value;
              out.dkernel[ko] += gup * xv;
              if (inside)
                out.dx[(static_cast<std::int64_t>(ih) * g.W + iw) * g.Cin + d] += gup * K[ko];
            }
          }
        }
      }
    }
  }
  return out;
}

OpCounter tropical_conv_op_count(const Shape& in, const ConvParams& p, TropicalMode m) {
  ConvGeom g = geometry(in, p);
  const std::uint64_t cells = static_cast<std::uint64_t>(g.Hout) * g.Wout * g.Cout;
  const std::uint64_t k2 = static_cast<std::uint64_t>(g.k) * g.k;
  OpCounter c;
  c.mults = 0;
  c.adds = cells * g.Cin * k2 + (p.bias ? cells : 0);
  c.comparisons = cells * (static_cast<std::uint64_t>(g.Cin) * (k2 - 1) +
                           (m.outer != OuterOp::Sum ? static_cast<std::uint64_t>(g.Cin) - 1 : 0));
  return c;
}

OpCounter standard_conv_op_count(const Shape& in, const ConvParams& p) {
  ConvGeom g = geometry(in, p);
  const std::uint64_t cells = static_cast<std::uint64_t>(g.Hout) * g.Wout * g.Cout;
  const std::uint64_t k2 = static_cast<std::uint64_t>(g.k) * g.k;
  OpCounter c;
  c.mults = cells * g.Cin * k2;
  c.adds = cells * g.Cin * k2;
  c.comparisons = 0;
  return c;
}

OpCounter dense_op_count(int in_features, int out_features) {
  OpCounter c;
  c.mults = static_cast<std::uint64_t>(in_features) * out_features;
  c.adds = static_cast<std::uint64_t>(in_features) * out_features;
  c.comparisons = 0;
  return c;
}

std::pair<Tensor, DenseCache> dense_forward(const Tensor& x, const Tensor& weight,
                                            const Tensor& bias, OpCounter* ops) {
  if (weight.shape().rank() != 2) throw std::invalid_argument("dense_forward: weight must be [out,in]");
  const int out_f = weight.shape()[0], in_f = weight.shape()[1];
  if (x.size() != in_f)
    throw std::invalid_argument("dense_forward: input size " + std::to_string(x.size()) +
                                " != " + std::to_string(in_f));
  if (bias.shape().rank() != 1 || bias.shape()[0] != out_f)
    throw std::invalid_argument("dense_forward: bias must be [out]");

  Tensor y(Shape{out_f});
  const double* W = weight.data();
  const double* X = x.data();
  for (int o = 0; o < out_f; ++o) {
    double acc = 0.0;
    const double* row = W + static_cast<std::int64_t>(o) * in_f;
    for (int i = 0; i < in_f; ++i) acc += row[i] * X[i];
    y[o] = acc + bias[o];
  }
  if (ops) *ops += dense_op_count(in_f, out_f);
  DenseCache cache;
  cache.input = Tensor(Shape{in_f}, std::vector<double>(X, X + in_f));
  return {std::move(y), std::move(cache)};
}

DenseGrads dense_backward(const Tensor& dy, const DenseCache& cache, const Tensor& weight) {
  const int out_f = weight.shape()[0], in_f = weight.shape()[1];
  if (dy.size() != out_f) throw std::invalid_argument("dense_backward: dy size mismatch");
  if (cache.input.size() != in_f) throw std::invalid_argument("dense_backward: cache mismatch");

  DenseGrads g;
  g.dx = zeros(Shape{in_f});
  g.dweight = zeros(weight.shape());
  g.dbias = zeros(Shape{out_f});
  const double* W = weight.data();
  const double* X = cache.input.data();
  for (int o = 0; o < out_f; ++o) {
    const double d = dy[o];
    g.dbias[o] = d;
    double* wrow = g.dweight.data() + static_cast<std::int64_t>(o) * in_f;
    const double* row = W + static_cast<std::int64_t>(o) * in_f;
    for (int i = 0; i < in_f; ++i) {
      wrow[i] += d * X[i];
      g.dx[i] += d * row[i];
    }
  }
  return g;
}

Tensor flatten_forward(const Tensor& x) {
  return Tensor(Shape{static_cast<int>(x.size())},
                std::vector<double>(x.data(), x.data() + x.size()));
}

Tensor flatten_backward(const Tensor& dy, const Shape& input_shape) {
  if (dy.size() != input_shape.elems())
    throw std::invalid_argument("flatten_backward: size mismatch");
  return Tensor(input_shape, std::vector<double>(dy.data(), dy.data() + dy.size()));
}

}  // namespace tcnn
