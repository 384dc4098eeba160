#include "tcnn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace tcnn {

std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits, int label) {
  const int n = static_cast<int>(logits.size());
  if (label < 0 || label >= n) throw std::invalid_argument("softmax_cross_entropy: label out of range");
  if (!logits.all_finite()) throw std::invalid_argument("softmax_cross_entropy: non-finite logits");

  double mx = logits[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
  double sum = 0.0;
  Tensor d(logits.shape());
  for (int i = 0; i < n; ++i) {
    d[i] = std::exp(logits[i] - mx);
    sum += d[i];
  }
  const double loss = std::log(sum) - (logits[label] - mx);
  for (int i = 0; i < n; ++i) d[i] = d[i] / sum - (i == label ? 1.0 : 0.0);
  return {loss, std::move(d)};
}

void SgdMomentum::step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
                       double grad_scale) {
  if (params.size() != grads.size()) throw std::invalid_argument("SgdMomentum: param/grad mismatch");
  if (velocity_.empty())
    for (Tensor* p : params) velocity_.push_back(zeros(p->shape()));
  if (velocity_.size() != params.size()) throw std::invalid_argument("SgdMomentum: slot count changed");

  for (size_t t = 0; t < params.size(); ++t) {
    Tensor& v = velocity_[t];
    Tensor& p = *params[t];
    const Tensor& g = *grads[t];
    if (p.shape() != g.shape() || p.shape() != v.shape())
      throw std::invalid_argument("SgdMomentum: shape mismatch at slot " + std::to_string(t));
    for (std::int64_t i = 0; i < p.size(); ++i) {
      const double gi = g[i] * grad_scale;
      if (!std::isfinite(gi))
        throw std::runtime_error("SgdMomentum: non-finite gradient at slot " + std::to_string(t) +
                                 " index " + std::to_string(i));
      v[i] = mu_ * v[i] + gi;
      p[i] -= lr_ * v[i];
    }
  }
}

namespace {

int argmax(const Tensor& t) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(t.size()); ++i)
    if (t[i] > t[best]) best = i;
  return best;
}

OpCounter forward_ops_per_sample(Network& net) {
  OpCounter total;
  for (const OpCounter& c : net.op_counts()) total += c;
  return total;
}

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

EvalResult evaluate_full(Network& net, const Dataset& ds, std::optional<NoiseKind> noise,
                         std::uint64_t noise_seed) {
  std::mt19937_64 noise_rng(noise_seed);
  double loss_sum = 0.0;
  int correct = 0;
  for (int i = 0; i < ds.size(); ++i) {
    Tensor img = ds.image(i);
    if (noise) img = apply_noise(img, *noise, noise_rng);
    Tensor logits = net.forward(img);
    auto [loss, d] = softmax_cross_entropy(logits, ds.label(i));
    loss_sum += loss;
    if (argmax(logits) == ds.label(i)) ++correct;
  }
  return {loss_sum / ds.size(), static_cast<double>(correct) / ds.size()};
}

}  // namespace

double evaluate(Network& net, const Dataset& ds, std::optional<NoiseKind> noise,
                std::uint64_t noise_seed) {
  return evaluate_full(net, ds, noise, noise_seed).accuracy;
}

TrainResult train(const TrainConfig& cfg, const Dataset& train_set, const Dataset& test_set,
                  std::ostream* log) {
  using clock = std::chrono::steady_clock;
  if (cfg.epochs < 1 || cfg.batch < 1) throw std::invalid_argument("train: epochs and batch must be >= 1");

  std::mt19937_64 rng(cfg.seed);
  Network net = build_network(arch_from_name(cfg.arch), train_set.image_shape(), rng);
  SgdMomentum opt(cfg.lr, cfg.momentum);

  const OpCounter fwd_ops = forward_ops_per_sample(net);
  const int n = train_set.size();
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = clock::now();
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    int correct = 0;
    for (int start = 0; start < n; start += cfg.batch) {
      const int bsz = std::min(cfg.batch, n - start);
      net.zero_grad();
      for (int b = 0; b < bsz; ++b) {
        const int idx = order[static_cast<size_t>(start + b)];
        Tensor logits = net.forward(train_set.image(idx));
        auto [loss, dlogits] = softmax_cross_entropy(logits, train_set.label(idx));
        if (!std::isfinite(loss))
          throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
        loss_sum += loss;
        if (argmax(logits) == train_set.label(idx)) ++correct;
        net.backward(dlogits);
      }
      opt.step(net.params(), net.grads(), 1.0 / bsz);
    }
    const double train_ms =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    const auto t1 = clock::now();
    const EvalResult test = evaluate_full(net, test_set, std::nullopt, 0);
    const double test_ms = std::chrono::duration<double, std::milli>(clock::now() - t1).count();

    const auto scaled = [&fwd_ops](int samples) {
      const auto s = static_cast<std::uint64_t>(samples);
      return OpCounter{fwd_ops.mults * s, fwd_ops.adds * s, fwd_ops.comparisons * s};
    };
    const OpCounter train_ops = scaled(n);
    const OpCounter test_ops = scaled(test_set.size());

    result.rows.push_back({epoch, "train", loss_sum / n, static_cast<double>(correct) / n,
                           train_ops, train_ms});
    result.rows.push_back({epoch, "test", test.loss, test.accuracy, test_ops, test_ms});

    if (test.accuracy > result.best_test_accuracy || result.best_epoch < 0) {
      result.best_test_accuracy = test.accuracy;
      result.best_epoch = epoch;
      result.best = snapshot(cfg.arch, cfg.dataset, cfg.seed, net);
    }

    if (log)
      *log << cfg.arch << "/" << cfg.dataset << " epoch " << epoch << "/" << cfg.epochs
           << "  train loss " << loss_sum / n << "  train acc "
           << static_cast<double>(correct) / n << "  test acc " << test.accuracy << "\n";
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string stem = cfg.out_dir + "/" + cfg.arch + "-" + cfg.dataset;
    result.metrics_path = stem + "-metrics.csv";
    result.checkpoint_path = stem + ".ckpt";
    write_metrics_csv(result.metrics_path, result.rows);
    save_checkpoint(result.checkpoint_path, result.best);
  }
  return result;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "epoch,split,loss,accuracy,mults,adds,comparisons,wall_ms\n";
  char buf[160];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.6f,%.6f,%llu,%llu,%llu,%.1f\n", r.epoch,
                  r.split.c_str(), r.loss, r.accuracy,
                  static_cast<unsigned long long>(r.ops.mults),
                  static_cast<unsigned long long>(r.ops.adds),
                  static_cast<unsigned long long>(r.ops.comparisons), r.wall_ms);
    f << buf;
  }
  if (!f) throw std::runtime_error(path + ": write failed");
}

}  // namespace tcnn
