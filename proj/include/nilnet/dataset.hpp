#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nilnet/errors.hpp"
#include "nilnet/matrix.hpp"

namespace nilnet {

// Where a dataset came from, enough to regenerate it.
struct Provenance {
  std::string generator;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> params;
};

struct LabeledDataset {
  Matrix features;  // n x d
  Labels labels;    // n, each in [0, n_classes)
  int n_classes = 0;
  Provenance provenance;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(features.cols()); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (int y : labels) {
      ++counts[static_cast<std::size_t>(y)];
    }
    return counts;
  }

  // Throws ShapeError when the container invariants do not hold.
  void validate() const {
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
      throw ShapeError("dataset: feature rows and label count differ");
    }
    for (int y : labels) {
      if (y < 0 || y >= n_classes) {
        throw ShapeError("dataset: label " + std::to_string(y) + " outside [0, " +
                         std::to_string(n_classes) + ")");
      }
    }
    if (!features.allFinite()) {
      throw ShapeError("dataset: non-finite feature");
    }
  }

  LabeledDataset subset(const std::vector<std::size_t>& rows) const {
    LabeledDataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
      out.labels.push_back(labels[rows[i]]);
    }
    out.n_classes = n_classes;
    out.provenance = provenance;
    return out;
  }
};

}  // namespace nilnet
