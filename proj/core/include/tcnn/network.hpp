#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tcnn/layers.hpp"

namespace tcnn {

class Layer {
public:
  virtual ~Layer() = default;

  /// Runs the layer and caches whatever backward() needs.
  virtual Tensor forward(const Tensor& x, OpCounter* ops = nullptr) = 0;
  /// Returns dx; accumulates parameter gradients into the layer.
  virtual Tensor backward(const Tensor& dy) = 0;

  virtual std::vector<Tensor*> params() { return {}; }
  virtual std::vector<Tensor*> grads() { return {}; }
  void zero_grad();

  virtual Shape output_shape(const Shape& in) const = 0;
  virtual OpCounter op_count(const Shape& in) const = 0;
  virtual std::string name() const = 0;
};

class TropicalConvLayer : public Layer {
public:
  TropicalConvLayer(ConvParams params, TropicalMode mode);

  Tensor forward(const Tensor& x, OpCounter* ops) override;
  Tensor backward(const Tensor& dy) override;
  std::vector<Tensor*> params() override;
  std::vector<Tensor*> grads() override;
  Shape output_shape(const Shape& in) const override;
  OpCounter op_count(const Shape& in) const override;
  std::string name() const override { return mode_name(mode_); }

  const ConvParams& conv_params() const { return params_; }
  TropicalMode mode() const { return mode_; }

private:
  ConvParams params_;
  TropicalMode mode_;
  ForwardCache cache_;
  Tensor dkernel_;
  Tensor dbias_;
};

class StandardConvLayer : public Layer {
public:
  explicit StandardConvLayer(ConvParams params);

  Tensor forward(const Tensor& x, OpCounter* ops) override;
  Tensor backward(const Tensor& dy) override;
  std::vector<Tensor*> params() override;
  std::vector<Tensor*> grads() override;
  Shape output_shape(const Shape& in) const override;
  OpCounter op_count(const Shape& in) const override;
  std::string name() const override { return "Conv"; }

  const ConvParams& conv_params() const { return params_; }

private:
  ConvParams params_;
  ForwardCache cache_;
  Tensor dkernel_;
  Tensor dbias_;
};

class ReluLayer : public Layer {
public:
  Tensor forward(const Tensor& x, OpCounter* ops) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override { return in; }
  OpCounter op_count(const Shape& in) const override;
  std::string name() const override { return "ReLU"; }

private:
  Tensor input_;
};

class FlattenLayer : public Layer {
public:
  Tensor forward(const Tensor& x, OpCounter* ops) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override { return Shape{static_cast<int>(in.elems())}; }
  OpCounter op_count(const Shape&) const override { return {}; }
  std::string name() const override { return "Flatten"; }

private:
  Shape input_shape_;
};

class DenseLayer : public Layer {
public:
  DenseLayer(Tensor weight, Tensor bias);

  Tensor forward(const Tensor& x, OpCounter* ops) override;
  Tensor backward(const Tensor& dy) override;
  std::vector<Tensor*> params() override;
  std::vector<Tensor*> grads() override;
  Shape output_shape(const Shape& in) const override;
  OpCounter op_count(const Shape& in) const override;
  std::string name() const override { return "Dense"; }

private:
  Tensor weight_, bias_;
  Tensor dweight_, dbias_;
  DenseCache cache_;
};

struct Network {
  std::vector<std::unique_ptr<Layer>> layers;
  Shape input_shape;

  Tensor forward(const Tensor& x, std::vector<OpCounter>* per_layer = nullptr);
  /// Backpropagates dLoss/dLogits; parameter gradients accumulate per layer.
  void backward(const Tensor& dy);
  void zero_grad();
  std::vector<Tensor*> params();
  std::vector<Tensor*> grads();
  std::int64_t param_count();
  std::vector<OpCounter> op_counts() const;  // closed-form, one per layer
};

/// The four experiment architectures.
enum class Arch { ConvConv, MinPSMaxPS, MinPMaxMaxPMin, MinPSConv };

std::string arch_name(Arch a);       // "conv-conv", "minps-maxps", ...
Arch arch_from_name(const std::string& name);
constexpr std::array<Arch, 4> all_archs() {
  return {Arch::ConvConv, Arch::MinPSMaxPS, Arch::MinPMaxMaxPMin, Arch::MinPSConv};
}

/// Uniform kernel init on [-scale, scale] for tropical layers.
inline constexpr double kTropicalInitScale = 0.5;

/// Builds the 4-layer network for a 28x28x1 or 32x32x3 input: both conv
/// stages produce 4 channels (15x15 then 7x7), then flatten and dense to 10.
Network build_network(Arch arch, const Shape& input, std::mt19937_64& rng);

}  // namespace tcnn
