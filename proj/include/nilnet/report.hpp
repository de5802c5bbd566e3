#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nilnet/metrics.hpp"

namespace nilnet {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double seconds = 0.0;
  std::vector<double> betas;  // one per squashing layer, in layer order

  bool operator==(const EpochRecord&) const = default;
};

struct ExperimentReport {
  std::string id;
  std::vector<std::string> beta_columns;  // e.g. "beta_layer1"
  std::vector<EpochRecord> epochs;
  ConfusionMatrix train_confusion;
  ConfusionMatrix test_confusion;
  nlohmann::json config = nlohmann::json::object();

  const EpochRecord& final() const { return epochs.back(); }

  bool operator==(const ExperimentReport&) const = default;
};

inline void to_json(nlohmann::json& j, const ConfusionMatrix& cm) {
  j = nlohmann::json{{"n_classes", cm.n_classes()}, {"counts", cm.counts()}};
}

inline void from_json(const nlohmann::json& j, ConfusionMatrix& cm) {
  const int n = j.at("n_classes").get<int>();
  const auto counts = j.at("counts").get<std::vector<std::int64_t>>();
  if (counts.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw ShapeError("confusion matrix json: counts size mismatch");
  }
  cm = ConfusionMatrix(n);
  for (int t = 0; t < n; ++t) {
    for (int p = 0; p < n; ++p) {
      cm.add(t, p, counts[static_cast<std::size_t>(t * n + p)]);
    }
  }
}

inline void to_json(nlohmann::json& j, const EpochRecord& r) {
  j = nlohmann::json{{"epoch", r.epoch},         {"train_loss", r.train_loss},
                     {"test_loss", r.test_loss}, {"train_acc", r.train_acc},
                     {"test_acc", r.test_acc},   {"seconds", r.seconds},
                     {"betas", r.betas}};
}

inline void from_json(const nlohmann::json& j, EpochRecord& r) {
  j.at("epoch").get_to(r.epoch);
  j.at("train_loss").get_to(r.train_loss);
  j.at("test_loss").get_to(r.test_loss);
  j.at("train_acc").get_to(r.train_acc);
  j.at("test_acc").get_to(r.test_acc);
  j.at("seconds").get_to(r.seconds);
  j.at("betas").get_to(r.betas);
}

inline void to_json(nlohmann::json& j, const ExperimentReport& r) {
  j = nlohmann::json{{"id", r.id},
                     {"beta_columns", r.beta_columns},
                     {"epochs", r.epochs},
                     {"train_confusion", r.train_confusion},
                     {"test_confusion", r.test_confusion},
                     {"config", r.config}};
}

inline void from_json(const nlohmann::json& j, ExperimentReport& r) {
  j.at("id").get_to(r.id);
  j.at("beta_columns").get_to(r.beta_columns);
  j.at("epochs").get_to(r.epochs);
  j.at("train_confusion").get_to(r.train_confusion);
  j.at("test_confusion").get_to(r.test_confusion);
  r.config = j.value("config", nlohmann::json::object());
}

}  // namespace nilnet
