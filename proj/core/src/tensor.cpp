#include "tcnn/tensor.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tcnn {

namespace {

std::vector<int> checked_dims(std::vector<int> dims) {
  std::int64_t n = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("Shape: extent must be >= 1, got " + std::to_string(d));
    if (n > std::numeric_limits<std::int64_t>::max() / d)
      throw std::invalid_argument("Shape: element count overflows int64");
    n *= d;
  }
  return dims;
}

}  // namespace

Shape::Shape(std::initializer_list<int> dims) : dims_(checked_dims(std::vector<int>(dims))) {}
Shape::Shape(std::vector<int> dims) : dims_(checked_dims(std::move(dims))) {}

std::int64_t Shape::elems() const {
  std::int64_t n = 1;
  for (int d : dims_) n *= d;
  return n;
}

std::string Shape::str() const {
  std::string s = "[";
  for (size_t i = 0; i < dims_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims_[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(static_cast<size_t>(shape_.elems()), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<std::int64_t>(data_.size()) != shape_.elems())
    throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_.str());
}

double& Tensor::at(std::span<const int> idx) { return data_[static_cast<size_t>(flat_index(shape_, idx))]; }
double Tensor::at(std::span<const int> idx) const { return data_[static_cast<size_t>(flat_index(shape_, idx))]; }

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor zeros(const Shape& shape) { return Tensor(shape); }

Tensor full(const Shape& shape, double value) {
  Tensor t(shape);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = value;
  return t;
}

std::int64_t flat_index(const Shape& shape, std::span<const int> idx) {
  if (static_cast<int>(idx.size()) != shape.rank())
    throw std::invalid_argument("flat_index: rank mismatch");
  std::int64_t flat = 0;
  for (int a = 0; a < shape.rank(); ++a) {
    if (idx[a] < 0 || idx[a] >= shape[a])
      throw std::out_of_range("flat_index: index " + std::to_string(idx[a]) +
                              " out of range for axis " + std::to_string(a) + " of " + shape.str());
    flat = flat * shape[a] + idx[a];
  }
  return flat;
}

std::int64_t flat_index(const Shape& shape, std::initializer_list<int> idx) {
  return flat_index(shape, std::span<const int>(idx));
}

std::vector<int> multi_index(const Shape& shape, std::int64_t flat) {
  if (flat < 0 || flat >= shape.elems()) throw std::out_of_range("multi_index: flat index out of range");
  std::vector<int> idx(static_cast<size_t>(shape.rank()));
  for (int a = shape.rank() - 1; a >= 0; --a) {
    idx[static_cast<size_t>(a)] = static_cast<int>(flat % shape[a]);
    flat /= shape[a];
  }
  return idx;
}

ReduceResult reduce(const Tensor& x, ReduceOp op, std::span<const int> axes) {
  const Shape& in = x.shape();
  if (axes.empty()) throw std::invalid_argument("reduce: empty reduction set");
  std::vector<bool> reduced(static_cast<size_t>(in.rank()), false);
  for (int a : axes) {
    if (a < 0 || a >= in.rank()) throw std::invalid_argument("reduce: axis out of range");
    if (reduced[static_cast<size_t>(a)]) throw std::invalid_argument("reduce: duplicate axis");
    reduced[static_cast<size_t>(a)] = true;
  }

  std::vector<int> out_dims;
  for (int a = 0; a < in.rank(); ++a)
    if (!reduced[static_cast<size_t>(a)]) out_dims.push_back(in[a]);
  Shape out_shape(out_dims);

  const bool is_sum = op == ReduceOp::Sum;
  ReduceResult r;
  r.values = is_sum ? zeros(out_shape)
                    : full(out_shape, op == ReduceOp::Min ? std::numeric_limits<double>::infinity()
                                                          : -std::numeric_limits<double>::infinity());
  if (!is_sum) r.arg.assign(static_cast<size_t>(out_shape.elems()), -1);

  // Single row-major pass over the source keeps the accumulation order
  // deterministic and makes first-index tie-breaking fall out of the strict
  // comparison below.
  std::vector<int> idx(static_cast<size_t>(in.rank()), 0);
  for (std::int64_t flat = 0; flat < x.size(); ++flat) {
    std::int64_t out = 0;
    for (int a = 0; a < in.rank(); ++a)
      if (!reduced[static_cast<size_t>(a)]) out = out * in[a] + idx[static_cast<size_t>(a)];

    double v = x[flat];
    if (is_sum) {
      r.values[out] += v;
    } else {
      double cur = r.values[out];
      bool better = op == ReduceOp::Min ? v < cur : v > cur;
      if (better || r.arg[static_cast<size_t>(out)] < 0) {
        r.values[out] = v;
        r.arg[static_cast<size_t>(out)] = flat;
      }
    }

    for (int a = in.rank() - 1; a >= 0; --a) {
      if (++idx[static_cast<size_t>(a)] < in[a]) break;
      idx[static_cast<size_t>(a)] = 0;
    }
  }
  return r;
}

ReduceResult reduce(const Tensor& x, ReduceOp op, std::initializer_list<int> axes) {
  return reduce(x, op, std::span<const int>(axes));
}

ReduceResult reduce_all(const Tensor& x, ReduceOp op) {
  std::vector<int> axes(static_cast<size_t>(x.shape().rank()));
  std::iota(axes.begin(), axes.end(), 0);
  return reduce(x, op, axes);
}

Tensor window(const Tensor& x, int h, int w, int k, const PadSpec& pad, double identity_fill) {
  const Shape& s = x.shape();
  if (s.rank() != 3) throw std::invalid_argument("window: expected [H,W,C] tensor, got " + s.str());
  if (k < 1) throw std::invalid_argument("window: kernel size must be >= 1");
  const int H = s[0], W = s[1], C = s[2];

  if (h + k <= 0 || h >= H || w + k <= 0 || w >= W)
    throw std::out_of_range("window: window fully outside input");
  if (pad.kind == PadSpec::Kind::None && (h < 0 || w < 0 || h + k > H || w + k > W))
    throw std::out_of_range("window: partial overlap requires padding");
  if (pad.kind != PadSpec::Kind::None &&
      (h < -pad.amount || w < -pad.amount || h + k > H + pad.amount || w + k > W + pad.amount))
    throw std::out_of_range("window: window exceeds pad amount");

  Tensor out(Shape{k, k, C});
  const double fill = pad.kind == PadSpec::Kind::Identity ? identity_fill : pad.value;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int c = 0; c < C; ++c) {
        int ih = h + i, iw = w + j;
        bool inside = ih >= 0 && ih < H && iw >= 0 && iw < W;
        out[(static_cast<std::int64_t>(i) * k + j) * C + c] =
            inside ? x[(static_cast<std::int64_t>(ih) * W + iw) * C + c] : fill;
      }
  return out;
}

int conv_out_extent(int in, int k, int stride, int pad) {
  if (in < 1 || k < 1 || stride < 1 || pad < 0)
    throw std::invalid_argument("conv_out_extent: invalid geometry");
  int out = (in + 2 * pad - k) / stride + 1;
  if (in + 2 * pad < k || out < 1)
    throw std::invalid_argument("conv_out_extent: kernel " + std::to_string(k) +
                                " does not fit input " + std::to_string(in));
  return out;
}

}  // namespace tcnn
