#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tcnn/checkpoint.hpp"
#include "tcnn/data.hpp"
#include "tcnn/network.hpp"

namespace tcnn {

struct TrainConfig {
  std::string dataset = "mnist";
  std::string arch = "conv-conv";
  int epochs = 10;
  int batch = 64;
  double lr = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  std::string out_dir;  // empty = keep results in memory only
};

struct MetricsRow {
  int epoch;
  std::string split;  // "train" | "test"
  double loss;
  double accuracy;
  OpCounter ops;  // forward closed-form per sample x samples seen
  double wall_ms;
};

struct TrainResult {
  std::vector<MetricsRow> rows;
  double best_test_accuracy = 0.0;
  int best_epoch = -1;
  Checkpoint best;
  std::string metrics_path;     // empty when out_dir is empty
  std::string checkpoint_path;
};

/// Numerically stabilized (max-subtracted) softmax cross-entropy.
/// Returns loss and dLoss/dLogits = softmax - onehot(label).
std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits, int label);

class SgdMomentum {
public:
  SgdMomentum(double lr, double momentum) : lr_(lr), mu_(momentum) {}

  /// v <- mu*v + g*grad_scale; theta <- theta - lr*v.
  /// Throws on non-finite gradients.
  void step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
            double grad_scale = 1.0);

private:
  double lr_, mu_;
  std::vector<Tensor> velocity_;
};

/// Deterministic given config+seed: fixed init, shuffle order and tie-breaks.
TrainResult train(const TrainConfig& cfg, const Dataset& train_set, const Dataset& test_set,
                  std::ostream* log = nullptr);

/// Top-1 accuracy over the full split; noise (if any) is applied per-image
/// before inference, with an engine seeded from noise_seed.
double evaluate(Network& net, const Dataset& ds, std::optional<NoiseKind> noise = std::nullopt,
                std::uint64_t noise_seed = 0);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

}  // namespace tcnn
