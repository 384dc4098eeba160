#include <benchmark/benchmark.h>

#include <random>

#include "tcnn/layers.hpp"
#include "tcnn/network.hpp"

using namespace tcnn;

namespace {

Tensor rand_tensor(const Shape& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Tensor t(s);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

ConvParams make_params(int k, int cin, int cout, int stride, bool bias, std::mt19937_64& rng) {
  ConvParams p;
  p.kernel = rand_tensor(Shape{k, k, cin, cout}, rng);
  p.stride = stride;
  if (bias) p.bias = rand_tensor(Shape{cout}, rng);
  return p;
}

// First-stage geometry of the MNIST experiments: 28x28x1, k=14, stride 1.
void BM_TropicalForwardMnistStage1(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const TropicalMode m = all_tropical_modes()[static_cast<size_t>(state.range(0))];
  Tensor x = rand_tensor(Shape{28, 28, 1}, rng);
  ConvParams p = make_params(14, 1, 4, 1, false, rng);
  for (auto _ : state) {
    auto out = tropical_conv_forward(x, p, m);
    benchmark::DoNotOptimize(out.first.data());
  }
}
BENCHMARK(BM_TropicalForwardMnistStage1)->DenseRange(0, 5)->Unit(benchmark::kMicrosecond);

void BM_StandardForwardMnistStage1(benchmark::State& state) {
  std::mt19937_64 rng(2);
  Tensor x = rand_tensor(Shape{28, 28, 1}, rng);
  ConvParams p = make_params(14, 1, 4, 1, true, rng);
  for (auto _ : state) {
    auto out = standard_conv_forward(x, p);
    benchmark::DoNotOptimize(out.first.data());
  }
}
BENCHMARK(BM_StandardForwardMnistStage1)->Unit(benchmark::kMicrosecond);

// Second stage: 15x15x4, k=3, stride 2.
void BM_TropicalForwardStage2(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const TropicalMode m = all_tropical_modes()[static_cast<size_t>(state.range(0))];
  Tensor x = rand_tensor(Shape{15, 15, 4}, rng);
  ConvParams p = make_params(3, 4, 4, 2, false, rng);
  for (auto _ : state) {
    auto out = tropical_conv_forward(x, p, m);
    benchmark::DoNotOptimize(out.first.data());
  }
}
BENCHMARK(BM_TropicalForwardStage2)->DenseRange(0, 5)->Unit(benchmark::kMicrosecond);

void BM_TropicalBackward(benchmark::State& state) {
  std::mt19937_64 rng(4);
  Tensor x = rand_tensor(Shape{28, 28, 1}, rng);
  ConvParams p = make_params(14, 1, 4, 1, false, rng);
  auto [y, cache] = tropical_conv_forward(x, p, kMinPS);
  Tensor dy = rand_tensor(y.shape(), rng);
  for (auto _ : state) {
    ConvGrads g = tropical_conv_backward(dy, cache, p, kMinPS);
    benchmark::DoNotOptimize(g.dx.data());
  }
}
BENCHMARK(BM_TropicalBackward)->Unit(benchmark::kMicrosecond);

void BM_NetworkForward(benchmark::State& state) {
  std::mt19937_64 rng(5);
  Network net = build_network(all_archs()[static_cast<size_t>(state.range(0))],
                              Shape{28, 28, 1}, rng);
  Tensor x = rand_tensor(Shape{28, 28, 1}, rng);
  for (auto _ : state) {
    Tensor y = net.forward(x);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_NetworkForward)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
