#pragma once

#include <cstdint>
#include <vector>

#include "nilnet/errors.hpp"
#include "nilnet/matrix.hpp"

namespace nilnet {

/// Class-by-class prediction counts; row = true class, column = predicted.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int n_classes)
      : n_(n_classes), counts_(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(n_classes), 0) {
    if (n_classes < 0) {
      throw InvalidParameter("confusion matrix: negative class count");
    }
  }

  static ConfusionMatrix from_predictions(int n_classes, const Labels& truth, const Labels& predicted) {
    if (truth.size() != predicted.size()) {
      throw ShapeError("confusion matrix: truth and prediction lengths differ");
    }
    ConfusionMatrix cm(n_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      cm.add(truth[i], predicted[i]);
    }
    return cm;
  }

  void add(int truth, int predicted, std::int64_t count = 1) {
    if (truth < 0 || truth >= n_ || predicted < 0 || predicted >= n_) {
      throw ShapeError("confusion matrix: class index out of range");
    }
    if (count < 0) {
      throw InvalidParameter("confusion matrix: negative count");
    }
    counts_[index(truth, predicted)] += count;
  }

  int n_classes() const noexcept { return n_; }
  std::int64_t at(int truth, int predicted) const { return counts_.at(index(truth, predicted)); }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }

  std::int64_t total() const noexcept {
    std::int64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }

  std::int64_t correct() const noexcept {
    std::int64_t t = 0;
    for (int i = 0; i < n_; ++i) t += counts_[index(i, i)];
    return t;
  }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(int t, int p) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(p);
  }

  int n_ = 0;
  std::vector<std::int64_t> counts_;
};

/// total correct / total predictions, in [0,1].
inline double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total <= 0) {
    throw InvalidParameter("accuracy: empty confusion matrix");
  }
  return static_cast<double>(cm.correct()) / static_cast<double>(total);
}

/// total incorrect / total predictions. Computed as 1 - accuracy so that the
/// two always sum to exactly 1.
inline double error(const ConfusionMatrix& cm) { return 1.0 - accuracy(cm); }

inline double accuracy_percent(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total <= 0) {
    throw InvalidParameter("accuracy: empty confusion matrix");
  }
  return static_cast<double>(cm.correct()) * 100.0 / static_cast<double>(total);
}

inline double error_percent(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total <= 0) {
    throw InvalidParameter("error: empty confusion matrix");
  }
  return static_cast<double>(total - cm.correct()) * 100.0 / static_cast<double>(total);
}

inline double accuracy_of(const Labels& truth, const Labels& predicted) {
  if (truth.empty() || truth.size() != predicted.size()) {
    throw ShapeError("accuracy_of: empty or mismatched label vectors");
  }
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace nilnet
