#include "tcnn/network.hpp"

#include <cmath>
#include <stdexcept>

namespace tcnn {

void Layer::zero_grad() {
  for (Tensor* g : grads())
    for (std::int64_t i = 0; i < g->size(); ++i) (*g)[i] = 0.0;
}

namespace {

void accumulate(Tensor& dst, const Tensor& src) {
  for (std::int64_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

TropicalConvLayer::TropicalConvLayer(ConvParams params, TropicalMode mode)
    : params_(std::move(params)), mode_(mode) {
  params_.validate();
  dkernel_ = zeros(params_.kernel.shape());
  if (params_.bias) dbias_ = zeros(params_.bias->shape());
}

Tensor TropicalConvLayer::forward(const Tensor& x, OpCounter* ops) {
  auto [y, cache] = tropical_conv_forward(x, params_, mode_, ops);
  cache_ = std::move(cache);
  return std::move(y);
}

Tensor TropicalConvLayer::backward(const Tensor& dy) {
  ConvGrads g = tropical_conv_backward(dy, cache_, params_, mode_);
  accumulate(dkernel_, g.dkernel);
  if (g.dbias) accumulate(dbias_, *g.dbias);
  return std::move(g.dx);
}

std::vector<Tensor*> TropicalConvLayer::params() {
  std::vector<Tensor*> p{&params_.kernel};
  if (params_.bias) p.push_back(&*params_.bias);
  return p;
}

std::vector<Tensor*> TropicalConvLayer::grads() {
  std::vector<Tensor*> g{&dkernel_};
  if (params_.bias) g.push_back(&dbias_);
  return g;
}

Shape TropicalConvLayer::output_shape(const Shape& in) const { return conv_out_shape(in, params_); }

OpCounter TropicalConvLayer::op_count(const Shape& in) const {
  return tropical_conv_op_count(in, params_, mode_);
}

StandardConvLayer::StandardConvLayer(ConvParams params) : params_(std::move(params)) {
  params_.validate();
  if (!params_.bias) throw std::invalid_argument("StandardConvLayer: bias is required");
  dkernel_ = zeros(params_.kernel.shape());
  dbias_ = zeros(params_.bias->shape());
}

Tensor StandardConvLayer::forward(const Tensor& x, OpCounter* ops) {
  auto [y, cache] = standard_conv_forward(x, params_, ops);
  cache_ = std::move(cache);
  return std::move(y);
}

Tensor StandardConvLayer::backward(const Tensor& dy) {
  ConvGrads g = standard_conv_backward(dy, cache_, params_);
  accumulate(dkernel_, g.dkernel);
  accumulate(dbias_, *g.dbias);
  return std::move(g.dx);
}

std::vector<Tensor*> StandardConvLayer::params() { return {&params_.kernel, &*params_.bias}; }
std::vector<Tensor*> StandardConvLayer::grads() { return {&dkernel_, &dbias_}; }

Shape StandardConvLayer::output_shape(const Shape& in) const { return conv_out_shape(in, params_); }

OpCounter StandardConvLayer::op_count(const Shape& in) const {
  return standard_conv_op_count(in, params_);
}

Tensor ReluLayer::forward(const Tensor& x, OpCounter* ops) {
  input_ = x;
  Tensor y = x;
  for (std::int64_t i = 0; i < y.size(); ++i)
    if (y[i] < 0.0) y[i] = 0.0;
  if (ops) ops->comparisons += static_cast<std::uint64_t>(x.size());
  return y;
}

Tensor ReluLayer::backward(const Tensor& dy) {
  if (dy.shape() != input_.shape()) throw std::invalid_argument("ReluLayer: dy shape mismatch");
  Tensor dx = dy;
  for (std::int64_t i = 0; i < dx.size(); ++i)
    if (input_[i] <= 0.0) dx[i] = 0.0;
  return dx;
}

OpCounter ReluLayer::op_count(const Shape& in) const {
  OpCounter c;
  c.comparisons = static_cast<std::uint64_t>(in.elems());
  return c;
}

Tensor FlattenLayer::forward(const Tensor& x, OpCounter*) {
  input_shape_ = x.shape();
  return flatten_forward(x);
}

Tensor FlattenLayer::backward(const Tensor& dy) { return flatten_backward(dy, input_shape_); }

DenseLayer::DenseLayer(Tensor weight, Tensor bias) : weight_(std::move(weight)), bias_(std::move(bias)) {
  if (weight_.shape().rank() != 2) throw std::invalid_argument("DenseLayer: weight must be [out,in]");
  dweight_ = zeros(weight_.shape());
  dbias_ = zeros(bias_.shape());
}

Tensor DenseLayer::forward(const Tensor& x, OpCounter* ops) {
  auto [y, cache] = dense_forward(x, weight_, bias_, ops);
  cache_ = std::move(cache);
  return std::move(y);
}

Tensor DenseLayer::backward(const Tensor& dy) {
  DenseGrads g = dense_backward(dy, cache_, weight_);
  accumulate(dweight_, g.dweight);
  accumulate(dbias_, g.dbias);
  return std::move(g.dx);
}

std::vector<Tensor*> DenseLayer::params() { return {&weight_, &bias_}; }
std::vector<Tensor*> DenseLayer::grads() { return {&dweight_, &dbias_}; }

Shape DenseLayer::output_shape(const Shape& in) const {
  if (in.elems() != weight_.shape()[1]) throw std::invalid_argument("DenseLayer: input size mismatch");
  return Shape{weight_.shape()[0]};
}

OpCounter DenseLayer::op_count(const Shape&) const {
  return dense_op_count(weight_.shape()[1], weight_.shape()[0]);
}

Tensor Network::forward(const Tensor& x, std::vector<OpCounter>* per_layer) {
  if (per_layer) per_layer->resize(layers.size());
  Tensor cur = x;
  for (size_t i = 0; i < layers.size(); ++i)
    cur = layers[i]->forward(cur, per_layer ? &(*per_layer)[i] : nullptr);
  return cur;
}

void Network::backward(const Tensor& dy) {
  Tensor cur = dy;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) cur = (*it)->backward(cur);
}

void Network::zero_grad() {
  for (auto& l : layers) l->zero_grad();
}

std::vector<Tensor*> Network::params() {
  std::vector<Tensor*> out;
  for (auto& l : layers)
    for (Tensor* p : l->params()) out.push_back(p);
  return out;
}

std::vector<Tensor*> Network::grads() {
  std::vector<Tensor*> out;
  for (auto& l : layers)
    for (Tensor* g : l->grads()) out.push_back(g);
  return out;
}

std::int64_t Network::param_count() {
  std::int64_t n = 0;
  for (Tensor* p : params()) n += p->size();
  return n;
}

std::vector<OpCounter> Network::op_counts() const {
  std::vector<OpCounter> out;
  Shape cur = input_shape;
  for (const auto& l : layers) {
    out.push_back(l->op_count(cur));
    cur = l->output_shape(cur);
  }
  return out;
}

std::string arch_name(Arch a) {
  switch (a) {
    case Arch::ConvConv: return "conv-conv";
    case Arch::MinPSMaxPS: return "minps-maxps";
    case Arch::MinPMaxMaxPMin: return "minpmax-maxpmin";
    case Arch::MinPSConv: return "minps-conv";
  }
  throw std::invalid_argument("arch_name: bad enum");
}

Arch arch_from_name(const std::string& name) {
  for (Arch a : all_archs())
    if (arch_name(a) == name) return a;
  throw std::invalid_argument("unknown architecture: " + name +
                              " (expected conv-conv, minps-maxps, minpmax-maxpmin or minps-conv)");
}

namespace {

Tensor uniform_tensor(const Shape& shape, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Tensor t(shape);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

ConvParams make_conv(int k, int cin, int cout, int stride, bool standard, std::mt19937_64& rng) {
  ConvParams p;
  const double scale = standard
                           ? std::sqrt(6.0 / (static_cast<double>(k) * k * cin + static_cast<double>(k) * k * cout))
                           : kTropicalInitScale;
  p.kernel = uniform_tensor(Shape{k, k, cin, cout}, scale, rng);
  p.stride = stride;
  if (standard) p.bias = zeros(Shape{cout});
  return p;
}

std::unique_ptr<DenseLayer> make_dense(int in_f, int out_f, std::mt19937_64& rng) {
  const double scale = std::sqrt(6.0 / (in_f + out_f));
  return std::make_unique<DenseLayer>(uniform_tensor(Shape{out_f, in_f}, scale, rng), zeros(Shape{out_f}));
}

}  // namespace

Network build_network(Arch arch, const Shape& input, std::mt19937_64& rng) {
  if (input.rank() != 3) throw std::invalid_argument("build_network: expected [H,W,C] input");
  int k1, s1;
  if (input == Shape{28, 28, 1}) {
    k1 = 14; s1 = 1;  // (28-14)/1+1 = 15
  } else if (input == Shape{32, 32, 3}) {
    k1 = 4; s1 = 2;   // (32-4)/2+1 = 15
  } else {
    throw std::invalid_argument("build_network: unsupported input shape " + input.str() +
                                " (expected 28x28x1 or 32x32x3)");
  }
  const int cin = input[2];
  const int ch = 4;     // both conv stages produce 4 channels
  const int k2 = 3, s2 = 2;  // 15 -> (15-3)/2+1 = 7

  Network net;
  net.input_shape = input;
  switch (arch) {
    case Arch::ConvConv:
      net.layers.push_back(std::make_unique<StandardConvLayer>(make_conv(k1, cin, ch, s1, true, rng)));
      net.layers.push_back(std::make_unique<ReluLayer>());
      net.layers.push_back(std::make_unique<StandardConvLayer>(make_conv(k2, ch, ch, s2, true, rng)));
      net.layers.push_back(std::make_unique<ReluLayer>());
      break;
    case Arch::MinPSMaxPS:
      net.layers.push_back(std::make_unique<TropicalConvLayer>(make_conv(k1, cin, ch, s1, false, rng), kMinPS));
      net.layers.push_back(std::make_unique<TropicalConvLayer>(make_conv(k2, ch, ch, s2, false, rng), kMaxPS));
      break;
    case Arch::MinPMaxMaxPMin:
      net.layers.push_back(std::make_unique<TropicalConvLayer>(make_conv(k1, cin, ch, s1, false, rng), kMinPMax));
      net.layers.push_back(std::make_unique<TropicalConvLayer>(make_conv(k2, ch, ch, s2, false, rng), kMaxPMin));
      break;
    case Arch::MinPSConv:
      net.layers.push_back(std::make_unique<TropicalConvLayer>(make_conv(k1, cin, ch, s1, false, rng), kMinPS));
      net.layers.push_back(std::make_unique<StandardConvLayer>(make_conv(k2, ch, ch, s2, true, rng)));
      net.layers.push_back(std::make_unique<ReluLayer>());
      break;
  }
  net.layers.push_back(std::make_unique<FlattenLayer>());
  net.layers.push_back(make_dense(7 * 7 * ch, 10, rng));
  return net;
}

}  // namespace tcnn
