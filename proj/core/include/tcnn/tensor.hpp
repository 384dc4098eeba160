#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tcnn {

/// Row-major dense shape. Every extent is >= 1; rank 0 denotes a scalar.
class Shape {
public:
  Shape() = default;
  Shape(std::initializer_list<int> dims);
  explicit Shape(std::vector<int> dims);

  int rank() const { return static_cast<int>(dims_.size()); }
  int operator[](int axis) const { return dims_[static_cast<size_t>(axis)]; }
  const std::vector<int>& dims() const { return dims_; }
  std::int64_t elems() const;
  std::string str() const;

  bool operator==(const Shape&) const = default;

private:
  std::vector<int> dims_;
};

/// Dense tensor of 64-bit reals in row-major order.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<size_t>(i)]; }

  double& at(std::span<const int> idx);
  double at(std::span<const int> idx) const;
  double& at(std::initializer_list<int> idx) { return at(std::span<const int>(idx)); }
  double at(std::initializer_list<int> idx) const { return at(std::span<const int>(idx)); }

  bool all_finite() const;

private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor zeros(const Shape& shape);
Tensor full(const Shape& shape, double value);

/// Flat offset of a multi-index; throws on rank or bounds violations.
std::int64_t flat_index(const Shape& shape, std::span<const int> idx);
std::int64_t flat_index(const Shape& shape, std::initializer_list<int> idx);
/// Inverse of flat_index.
std::vector<int> multi_index(const Shape& shape, std::int64_t flat);

enum class ReduceOp { Sum, Min, Max };

struct ReduceResult {
  Tensor values;
  /// For Min/Max: per output element, the flat index into the source of the
  /// selected element (smallest flat index on ties). Empty for Sum.
  std::vector<std::int64_t> arg;
};

/// Reduction over the given axes in deterministic row-major order.
ReduceResult reduce(const Tensor& x, ReduceOp op, std::span<const int> axes);
ReduceResult reduce(const Tensor& x, ReduceOp op, std::initializer_list<int> axes);
ReduceResult reduce_all(const Tensor& x, ReduceOp op);

struct PadSpec {
  enum class Kind { None, Value, Identity };
  Kind kind = Kind::None;
  int amount = 0;    // cells added on every border
  double value = 0.0;  // fill for Kind::Value

  static PadSpec none() { return {}; }
  static PadSpec with_value(int amount, double v) { return {Kind::Value, amount, v}; }
  static PadSpec identity(int amount) { return {Kind::Identity, amount, 0.0}; }
};

/// k x k x C patch of an [H,W,C] tensor with top-left at (h,w); h and w may be
/// negative when padding allows it. Out-of-bounds cells are filled with
/// pad.value (Kind::Value) or identity_fill (Kind::Identity, chosen by the
/// consuming reduction). Kind::None requires the window to lie fully inside.
Tensor window(const Tensor& x, int h, int w, int k, const PadSpec& pad,
              double identity_fill = 0.0);

/// floor((in + 2*pad - k)/stride) + 1; throws if the result is < 1.
int conv_out_extent(int in, int k, int stride, int pad);

}  // namespace tcnn
