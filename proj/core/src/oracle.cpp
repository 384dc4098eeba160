#include "tcnn/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcnn::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fetch X(h,w,d) honoring the pad spec; identity cells report absent.
bool fetch(const Tensor& x, const PadSpec& pad, int h, int w, int d, double* out) {
  const int H = x.shape()[0], W = x.shape()[1];
  if (h >= 0 && h < H && w >= 0 && w < W) {
    *out = x.at({h, w, d});
    return true;
  }
  if (pad.kind == PadSpec::Kind::Value) {
    *out = pad.value;
    return true;
  }
  if (pad.kind == PadSpec::Kind::Identity) return false;
  throw std::out_of_range("oracle: window escapes unpadded input");
}

}  // namespace

OracleResult forward(const Tensor& x, const ConvParams& p, std::optional<TropicalMode> mode) {
  p.validate();
  if (x.shape().rank() != 3) throw std::invalid_argument("oracle: expected [H,W,C] input");
  if (x.shape()[2] != p.in_channels()) throw std::invalid_argument("oracle: channel mismatch");
  if (!x.all_finite()) throw std::invalid_argument("oracle: non-finite input");

  const int k = p.kernel_size();
  const int cin = p.in_channels();
  const int cout = p.out_channels();
  const int pad = p.pad.kind == PadSpec::Kind::None ? 0 : p.pad.amount;
  const int hout = (x.shape()[0] + 2 * pad - k) / p.stride + 1;
  const int wout = (x.shape()[1] + 2 * pad - k) / p.stride + 1;
  if (x.shape()[0] + 2 * pad < k || x.shape()[1] + 2 * pad < k || hout < 1 || wout < 1)
    throw std::invalid_argument("oracle: kernel does not fit input");

  OracleResult r;
  r.output = Tensor(Shape{hout, wout, cout});
  const bool tropical = mode.has_value();
  if (tropical) {
    r.inner_arg.assign(static_cast<size_t>(hout) * wout * cin * cout, -1);
    if (mode->outer != OuterOp::Sum) r.outer_arg.assign(static_cast<size_t>(hout) * wout * cout, -1);
  }

  for (int h = 0; h < hout; ++h) {
    for (int w = 0; w < wout; ++w) {
      for (int pch = 0; pch < cout; ++pch) {
        double y;
        if (!tropical) {
          // Y(h,w,p) = sum_{i,j,d} X(h+i, w+j, d) * K(i,j,d,p) + bias.
          // Terms are accumulated in window order (i, j, d) on purpose: it
          // matches the production loop, so equality can be checked exactly.
          double acc = 0.0;
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
              for (int d = 0; d < cin; ++d) {
                double xv;
                if (!fetch(x, p.pad, h * p.stride - pad + i, w * p.stride - pad + j, d, &xv))
                  throw std::invalid_argument("oracle: identity padding under standard conv");
                acc += xv * p.kernel.at({i, j, d, pch});
              }
          y = acc + (p.bias ? (*p.bias)[pch] : 0.0);
        } else {
          // Y(h,w,p) = outer_d inner_{i,j} (X(h+i, w+j, d) + K(i,j,d,p))
          const bool inner_min = mode->inner == InnerOp::MinPlus;
          double outer = mode->outer == OuterOp::Sum ? 0.0
                         : mode->outer == OuterOp::Max ? -kInf : kInf;
          for (int d = 0; d < cin; ++d) {
            double inner = inner_min ? kInf : -kInf;
            int arg = -1;
            for (int i = 0; i < k; ++i)
              for (int j = 0; j < k; ++j) {
                double xv;
                if (!fetch(x, p.pad, h * p.stride - pad + i, w * p.stride - pad + j, d, &xv)) continue;
                const double s = xv + p.kernel.at({i, j, d, pch});
                if (arg < 0 || (inner_min ? s < inner : s > inner)) {
                  inner = s;
                  arg = i * k + j;
                }
              }
            if (arg < 0) throw std::invalid_argument("oracle: empty inner reduction");
            r.inner_arg[((static_cast<size_t>(h) * wout + w) * cin + d) * cout + pch] = arg;
            if (mode->outer == OuterOp::Sum) {
              outer += inner;
            } else {
              const bool wins = mode->outer == OuterOp::Max ? inner > outer : inner < outer;
              if (d == 0 || wins) {
                outer = inner;
                r.outer_arg[(static_cast<size_t>(h) * wout + w) * cout + pch] = d;
              }
            }
          }
          y = outer + (p.bias ? (*p.bias)[pch] : 0.0);
        }
        if (!std::isfinite(y)) throw std::runtime_error("oracle: non-finite output");
        r.output.at({h, w, pch}) = y;
      }
    }
  }
  return r;
}

bool has_ties(const Tensor& x, const ConvParams& p, TropicalMode m, double tol) {
  const int k = p.kernel_size();
  const int cin = p.in_channels();
  const int cout = p.out_channels();
  const int pad = p.pad.kind == PadSpec::Kind::None ? 0 : p.pad.amount;
  const int hout = (x.shape()[0] + 2 * pad - k) / p.stride + 1;
  const int wout = (x.shape()[1] + 2 * pad - k) / p.stride + 1;
  const bool inner_min = m.inner == InnerOp::MinPlus;

  for (int h = 0; h < hout; ++h)
    for (int w = 0; w < wout; ++w)
      for (int pch = 0; pch < cout; ++pch) {
        double obest = 0, osecond = 0;
        int ocount = 0;
        for (int d = 0; d < cin; ++d) {
          double best = 0, second = 0;
          int count = 0;
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
              double xv;
              if (!fetch(x, p.pad, h * p.stride - pad + i, w * p.stride - pad + j, d, &xv)) continue;
              const double s = xv + p.kernel.at({i, j, d, pch});
              if (count == 0) {
                best = s;
              } else {
                const bool wins = inner_min ? s < best : s > best;
                if (wins) { second = best; best = s; }
                else if (count == 1 || (inner_min ? s < second : s > second)) second = s;
              }
              ++count;
            }
          if (count > 1 && std::abs(best - second) < tol) return true;
          if (m.outer != OuterOp::Sum) {
            if (ocount == 0) {
              obest = best;
            } else {
              const bool wins = m.outer == OuterOp::Max ? best > obest : best < obest;
              if (wins) { osecond = obest; obest = best; }
              else if (ocount == 1 || (m.outer == OuterOp::Max ? best > osecond : best < osecond)) osecond = best;
            }
            ++ocount;
          }
        }
        if (m.outer != OuterOp::Sum && ocount > 1 && std::abs(obest - osecond) < tol) return true;
      }
  return false;
}

NumericGrads grad(const Tensor& x, const ConvParams& p, std::optional<TropicalMode> mode,
                  const Tensor& dy, double eps) {
  const auto weighted = [&dy](const Tensor& y) {
    if (y.shape() != dy.shape()) throw std::invalid_argument("oracle::grad: dy shape mismatch");
    double acc = 0.0;
    for (std::int64_t i = 0; i < y.size(); ++i) acc += dy[i] * y[i];
    return acc;
  };

  NumericGrads g;
  g.dx = zeros(x.shape());
  g.dkernel = zeros(p.kernel.shape());
  if (p.bias) g.dbias = zeros(p.bias->shape());

  Tensor xp = x;
  for (std::int64_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + eps;
    const double up = weighted(forward(xp, p, mode).output);
    xp[i] = x[i] - eps;
    const double dn = weighted(forward(xp, p, mode).output);
    xp[i] = x[i];
    g.dx[i] = (up - dn) / (2 * eps);
  }

  ConvParams pp = p;
  for (std::int64_t i = 0; i < p.kernel.size(); ++i) {
    pp.kernel[i] = p.kernel[i] + eps;
    const double up = weighted(forward(x, pp, mode).output);
    pp.kernel[i] = p.kernel[i] - eps;
    const double dn = weighted(forward(x, pp, mode).output);
    pp.kernel[i] = p.kernel[i];
    g.dkernel[i] = (up - dn) / (2 * eps);
  }

  if (p.bias) {
    for (std::int64_t i = 0; i < p.bias->size(); ++i) {
      (*pp.bias)[i] = (*p.bias)[i] + eps;
      const double up = weighted(forward(x, pp, mode).output);
      (*pp.bias)[i] = (*p.bias)[i] - eps;
      const double dn = weighted(forward(x, pp, mode).output);
      (*pp.bias)[i] = (*p.bias)[i];
      (*g.dbias)[i] = (up - dn) / (2 * eps);
    }
  }
  return g;
}

}  // namespace tcnn::oracle
