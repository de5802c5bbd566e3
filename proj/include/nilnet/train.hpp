#pragma once

// Training loop: softmax cross-entropy, Adam, per-epoch metrics.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "nilnet/adam.hpp"
#include "nilnet/dataset.hpp"
#include "nilnet/errors.hpp"
#include "nilnet/metrics.hpp"
#include "nilnet/network.hpp"
#include "nilnet/report.hpp"

namespace nilnet {

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 0.1;
  std::size_t batch_size = 0;  // 0 = full batch
  AdamConfig adam;
  std::uint64_t seed = 1;
  InitScheme init_scheme = InitScheme::glorot_uniform;

  void validate() const {
    if (epochs < 1) {
      throw InvalidParameter("train config: epochs must be >= 1");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw InvalidParameter("train config: learning rate must be positive");
    }
  }
};

struct TrainCallbacks {
  std::function<void(const EpochRecord&)> on_epoch;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  Labels predicted;
};

inline Evaluation evaluate(const Network& net, const LabeledDataset& data) {
  const Matrix logits = predict_logits(net, data.features);
  Evaluation ev;
  ev.loss = softmax_cross_entropy(logits, data.labels).loss;
  ev.predicted.resize(data.size());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    ev.predicted[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  ev.accuracy = accuracy_of(data.labels, ev.predicted);
  return ev;
}

inline std::vector<std::string> beta_column_names(const Network& net) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    if (net.layers[k].activation.is_squashing()) {
      names.push_back("beta_layer" + std::to_string(k + 1));
    }
  }
  return names;
}

inline std::vector<double> squashing_betas(const Network& net) {
  std::vector<double> out;
  for (const auto& l : net.layers) {
    if (l.activation.is_squashing()) out.push_back(l.beta);
  }
  return out;
}

/// One optimizer step on a batch; returns the pre-step batch loss.
inline double train_step(Network& net, const Matrix& x, const Labels& y, AdamState& state,
                         const TrainConfig& cfg) {
  ForwardResult fw = forward(net, x);
  LossResult lr = softmax_cross_entropy(fw.logits, y);
  const Gradients grads = backward(net, fw.cache, lr.dlogits);
  adam_step(net, grads, state, cfg.learning_rate, cfg.adam);
  return lr.loss;
}

/// Trains `net` in place. Deterministic for a fixed seed: the batch order is
/// the only randomness, and full-batch training uses none.
inline ExperimentReport train(Network& net, const LabeledDataset& train_set,
                              const LabeledDataset& test_set, const TrainConfig& cfg,
                              const TrainCallbacks& callbacks = {}) {
  cfg.validate();
  net.validate();
  train_set.validate();
  test_set.validate();
  if (train_set.size() == 0 || test_set.size() == 0) {
    throw ShapeError("train: empty dataset");
  }
  if (static_cast<Eigen::Index>(train_set.dims()) != net.input_dim() ||
      static_cast<Eigen::Index>(test_set.dims()) != net.input_dim()) {
    throw ShapeError("train: dataset dimension does not match network input");
  }
  if (train_set.n_classes > net.n_classes() || test_set.n_classes > net.n_classes()) {
    throw ShapeError("train: more classes than network outputs");
  }

  ExperimentReport report;
  report.beta_columns = beta_column_names(net);
  report.epochs.reserve(static_cast<std::size_t>(cfg.epochs));

  AdamState state = AdamState::zeros_like(net);
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = train_set.size();
  const bool full_batch = cfg.batch_size == 0 || cfg.batch_size >= n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Matrix xb;
  Labels yb;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (full_batch) {
      train_step(net, train_set.features, train_set.labels, state, cfg);
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < n; start += cfg.batch_size) {
        const std::size_t len = std::min(cfg.batch_size, n - start);
        xb.resize(static_cast<Eigen::Index>(len), train_set.features.cols());
        yb.resize(len);
        for (std::size_t i = 0; i < len; ++i) {
          xb.row(static_cast<Eigen::Index>(i)) =
              train_set.features.row(static_cast<Eigen::Index>(order[start + i]));
          yb[i] = train_set.labels[order[start + i]];
        }
        train_step(net, xb, yb, state, cfg);
      }
    }
    const auto t1 = std::chrono::steady_clock::now();

    const Evaluation tr = evaluate(net, train_set);
    const Evaluation te = evaluate(net, test_set);
    if (!std::isfinite(tr.loss) || !std::isfinite(te.loss)) {
      throw DivergenceError(epoch, "non-finite loss");
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = tr.loss;
    rec.test_loss = te.loss;
    rec.train_acc = tr.accuracy;
    rec.test_acc = te.accuracy;
    rec.seconds = std::chrono::duration<double>(t1 - t0).count();
    rec.betas = squashing_betas(net);
    report.epochs.push_back(rec);
    if (callbacks.on_epoch) {
      callbacks.on_epoch(rec);
    }
    if (epoch == cfg.epochs) {
      const int classes = static_cast<int>(net.n_classes());
      report.train_confusion = ConfusionMatrix::from_predictions(classes, train_set.labels, tr.predicted);
      report.test_confusion = ConfusionMatrix::from_predictions(classes, test_set.labels, te.predicted);
    }
  }
  return report;
}

}  // namespace nilnet
