#pragma once

// Experiment runner: configs, the three toy problems, the logic-gate
// problems, the activation benchmark, and report files.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nilnet/datasets.hpp"
#include "nilnet/errors.hpp"
#include "nilnet/idx.hpp"
#include "nilnet/logic_gates.hpp"
#include "nilnet/report.hpp"
#include "nilnet/svg.hpp"
#include "nilnet/train.hpp"

namespace nilnet {

// ---------------------------------------------------------------------------
// Config

struct ExperimentConfig {
  std::string experiment = "gaussian";  // gaussian|circle|spiral|two_line|four_line|bench
  std::uint64_t seed = 1;               // data, split, init and batch order

  // data
  std::size_t n_per_class = 250;
  std::size_t n_points = 500;  // two_line / four_line
  double turns = 1.0;
  double noise = 0.2;
  double test_fraction = 0.2;

  // architecture
  std::vector<int> sizes{2, 2};
  std::string activation = "squashing";
  std::string output_activation = "squashing";
  double beta0 = 0.1;
  std::size_t k = 2;        // gate experiments
  double beta_gate = 0.1;   // gate experiments

  // training
  int epochs = 10;
  double learning_rate = 0.1;
  std::size_t batch_size = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::string init_scheme = "glorot_uniform";

  // benchmark
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::size_t train_limit = 6000;
  std::size_t test_limit = 1000;
  std::vector<std::string> variants{"relu", "sigmoid", "tanh", "squashing-nl", "squashing"};

  std::string out_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;

  TrainConfig train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.learning_rate = learning_rate;
    t.batch_size = batch_size;
    t.adam = {adam_beta1, adam_beta2, adam_epsilon};
    t.seed = seed;
    t.init_scheme = parse_init_scheme(init_scheme);
    return t;
  }

  bool is_toy() const { return experiment == "gaussian" || experiment == "circle" || experiment == "spiral"; }
  bool is_gate() const { return experiment == "two_line" || experiment == "four_line"; }

  void validate() const {
    if (!is_toy() && !is_gate() && experiment != "bench") {
      throw ConfigError("unknown experiment '" + experiment + "'");
    }
    try {
      train_config().validate();
      ActivationKind::parse(activation, beta0);
      ActivationKind::parse(output_activation, beta0);
      for (const auto& v : variants) ActivationKind::parse(v, beta0);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (sizes.size() < 2) throw ConfigError("sizes needs at least two entries");
    for (int s : sizes) {
      if (s < 1) throw ConfigError("layer sizes must be positive");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0,1)");
    if (is_gate() && k == 0) throw ConfigError("k must be >= 1");
    if (experiment == "bench" && variants.size() < 2) throw ConfigError("bench needs at least two variants");
  }
};

namespace detail {

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json{{"experiment", c.experiment},
                     {"seed", c.seed},
                     {"n_per_class", c.n_per_class},
                     {"n_points", c.n_points},
                     {"turns", c.turns},
                     {"noise", c.noise},
                     {"test_fraction", c.test_fraction},
                     {"sizes", c.sizes},
                     {"activation", c.activation},
                     {"output_activation", c.output_activation},
                     {"beta0", c.beta0},
                     {"k", c.k},
                     {"beta_gate", c.beta_gate},
                     {"epochs", c.epochs},
                     {"learning_rate", c.learning_rate},
                     {"batch_size", c.batch_size},
                     {"adam_beta1", c.adam_beta1},
                     {"adam_beta2", c.adam_beta2},
                     {"adam_epsilon", c.adam_epsilon},
                     {"init_scheme", c.init_scheme},
                     {"train_images", c.train_images},
                     {"train_labels", c.train_labels},
                     {"test_images", c.test_images},
                     {"test_labels", c.test_labels},
                     {"train_limit", c.train_limit},
                     {"test_limit", c.test_limit},
                     {"variants", c.variants},
                     {"out_dir", c.out_dir}};
}

/// Overlays the keys present in `j` onto `c`. Unknown keys are an error.
inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "experiment", "seed", "n_per_class", "n_points", "turns", "noise", "test_fraction",
      "sizes", "activation", "output_activation", "beta0", "k", "beta_gate", "epochs",
      "learning_rate", "batch_size", "adam_beta1", "adam_beta2", "adam_epsilon", "init_scheme",
      "train_images", "train_labels", "test_images", "test_labels", "train_limit", "test_limit",
      "variants", "out_dir"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  using detail::read_key;
  read_key(j, "experiment", c.experiment);
  read_key(j, "seed", c.seed);
  read_key(j, "n_per_class", c.n_per_class);
  read_key(j, "n_points", c.n_points);
  read_key(j, "turns", c.turns);
  read_key(j, "noise", c.noise);
  read_key(j, "test_fraction", c.test_fraction);
  read_key(j, "sizes", c.sizes);
  read_key(j, "activation", c.activation);
  read_key(j, "output_activation", c.output_activation);
  read_key(j, "beta0", c.beta0);
  read_key(j, "k", c.k);
  read_key(j, "beta_gate", c.beta_gate);
  read_key(j, "epochs", c.epochs);
  read_key(j, "learning_rate", c.learning_rate);
  read_key(j, "batch_size", c.batch_size);
  read_key(j, "adam_beta1", c.adam_beta1);
  read_key(j, "adam_beta2", c.adam_beta2);
  read_key(j, "adam_epsilon", c.adam_epsilon);
  read_key(j, "init_scheme", c.init_scheme);
  read_key(j, "train_images", c.train_images);
  read_key(j, "train_labels", c.train_labels);
  read_key(j, "test_images", c.test_images);
  read_key(j, "test_labels", c.test_labels);
  read_key(j, "train_limit", c.train_limit);
  read_key(j, "test_limit", c.test_limit);
  read_key(j, "variants", c.variants);
  read_key(j, "out_dir", c.out_dir);
}

/// Published settings for each experiment.
inline ExperimentConfig default_config(std::string_view experiment, std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.experiment = std::string(experiment);
  c.seed = seed;
  if (experiment == "gaussian") {
    c.sizes = {2, 2};
    c.epochs = 10;
    c.learning_rate = 0.1;
  } else if (experiment == "circle") {
    c.sizes = {2, 8, 2};
    c.epochs = 150;
    c.learning_rate = 0.1;
    c.beta0 = 1e-6;
  } else if (experiment == "spiral") {
    c.sizes = {2, 64, 128, 2};
    c.epochs = 2000;
    c.learning_rate = 0.001;
  } else if (experiment == "two_line" || experiment == "four_line") {
    c.k = experiment == "two_line" ? 2 : 4;
    c.sizes = {2, static_cast<int>(c.k), 1};
    c.epochs = experiment == "two_line" ? 750 : 4000;
    c.learning_rate = 0.02;
  } else if (experiment == "bench") {
    c.sizes = {784, 128, 10};
    c.activation = "squashing";
    c.output_activation = "identity";
    c.epochs = 10;
    c.batch_size = 32;
    c.learning_rate = 1e-4;
  } else {
    throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c = default_config(j.value("experiment", std::string("gaussian")), j.value("seed", std::uint64_t{1}));
  from_json(j, c);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Data

struct DataSplit {
  LabeledDataset train;
  LabeledDataset test;
};

inline LabeledDataset generate_dataset(const ExperimentConfig& c) {
  if (c.experiment == "gaussian") return gen_gaussian(c.n_per_class, c.seed);
  if (c.experiment == "circle") return gen_circle(c.n_per_class, c.seed);
  if (c.experiment == "spiral") return gen_spiral(c.n_per_class, c.turns, c.noise, c.seed);
  if (c.experiment == "two_line") return gen_halfplane_region(default_two_lines(), c.n_points, Box{}, c.seed);
  if (c.experiment == "four_line") return gen_halfplane_region(default_four_lines(), c.n_points, Box{}, c.seed);
  throw ConfigError("no generator for experiment '" + c.experiment + "'");
}

inline DataSplit make_data(const ExperimentConfig& c) {
  auto [tr, te] = split(generate_dataset(c), c.test_fraction, c.seed);
  return {std::move(tr), std::move(te)};
}

// ---------------------------------------------------------------------------
// Toy problems

inline ExperimentReport run_toy_experiment(const ExperimentConfig& c, const TrainCallbacks& cb = {}) {
  c.validate();
  if (!c.is_toy()) throw ConfigError("not a toy experiment: " + c.experiment);
  const DataSplit data = make_data(c);
  const TrainConfig tc = c.train_config();
  std::mt19937_64 rng(c.seed);
  Network net = make_mlp(c.sizes, ActivationKind::parse(c.activation, c.beta0),
                         ActivationKind::parse(c.output_activation, c.beta0), tc.init_scheme, rng);
  ExperimentReport rep = train(net, data.train, data.test, tc, cb);
  rep.id = c.experiment;
  rep.config = c;
  return rep;
}

inline ExperimentReport run_toy_experiment(std::string_view which, std::uint64_t seed = 1) {
  return run_toy_experiment(default_config(which, seed));
}

// ---------------------------------------------------------------------------
// Logic-gate problems

struct GateResult {
  ExperimentReport report;
  Network net;
  GateExplanation explanation;
  double initial_loss = 0.0;          // train loss before the first update
  double soft_accuracy = 0.0;         // train accuracy of the trained network
  double crisp_accuracy = 0.0;        // train accuracy with squash replaced by cut
  double explanation_accuracy = 0.0;  // train accuracy of the extracted inequalities
  std::vector<double> beta_drift;     // final minus initial beta per squashing layer
  bool gate_intact = false;
};

inline GateResult run_gate_experiment(const ExperimentConfig& c, const TrainCallbacks& cb = {}) {
  c.validate();
  if (!c.is_gate()) throw ConfigError("not a gate experiment: " + c.experiment);
  const DataSplit data = make_data(c);
  const TrainConfig tc = c.train_config();
  std::mt19937_64 rng(c.seed);
  GateNetworkSpec spec;
  spec.k = c.k;
  spec.beta_layer1 = c.beta0;
  spec.beta_gate = c.beta_gate;
  spec.activation = ActivationKind::parse(c.activation, c.beta0).type;
  spec.init_scheme = tc.init_scheme;

  GateResult r;
  r.net = build_gate_network(spec, rng);
  const std::vector<double> beta_start = squashing_betas(r.net);
  r.initial_loss = evaluate(r.net, data.train).loss;
  r.report = train(r.net, data.train, data.test, tc, cb);
  r.report.id = c.experiment;
  r.report.config = c;

  r.soft_accuracy = r.report.final().train_acc;
  r.crisp_accuracy = region_accuracy(crisp_decision_region(r.net), data.train);
  r.explanation = extract_line_explanations(r.net);
  r.explanation_accuracy = region_accuracy([&](double x, double y) { return r.explanation.contains(x, y); }, data.train);
  const std::vector<double> beta_end = squashing_betas(r.net);
  for (std::size_t i = 0; i < beta_end.size(); ++i) r.beta_drift.push_back(beta_end[i] - beta_start[i]);
  r.gate_intact = gate_is_intact(r.net);
  return r;
}

inline GateResult run_gate_experiment(std::string_view which, std::uint64_t seed = 1) {
  return run_gate_experiment(default_config(which, seed));
}

inline nlohmann::json gate_summary_json(const GateResult& r) {
  nlohmann::json j = explanation_json(r.explanation);
  j["initial_train_loss"] = r.initial_loss;
  j["final_train_loss"] = r.report.final().train_loss;
  j["soft_accuracy"] = r.soft_accuracy;
  j["crisp_accuracy"] = r.crisp_accuracy;
  j["explanation_accuracy"] = r.explanation_accuracy;
  j["beta_drift"] = r.beta_drift;
  j["gate_intact"] = r.gate_intact;
  return j;
}

// ---------------------------------------------------------------------------
// Activation benchmark

struct BenchmarkResult {
  std::vector<ExperimentReport> runs;  // one per variant, id = variant name

  const ExperimentReport& run(std::string_view variant) const {
    for (const auto& r : runs) {
      if (r.id == variant) return r;
    }
    throw InvalidParameter("benchmark: no run named '" + std::string(variant) + "'");
  }
};

/// Trains one network per activation variant. Every variant starts from the
/// same initial weights and sees the same batch order.
inline BenchmarkResult run_activation_benchmark(const LabeledDataset& train_set, const LabeledDataset& test_set,
                                                const ExperimentConfig& c,
                                                const std::function<void(const std::string&, const EpochRecord&)>& on_epoch = {}) {
  c.validate();
  if (c.variants.size() < 2) throw InvalidParameter("benchmark: need at least two activations");
  std::vector<int> sizes = c.sizes;
  sizes.front() = static_cast<int>(train_set.dims());
  const TrainConfig tc = c.train_config();
  const ActivationKind out = ActivationKind::parse(c.output_activation, c.beta0);
  BenchmarkResult res;
  for (const auto& v : c.variants) {
    std::mt19937_64 rng(c.seed);
    Network net = make_mlp(sizes, ActivationKind::parse(v, c.beta0), out, tc.init_scheme, rng);
    TrainCallbacks cb;
    if (on_epoch) cb.on_epoch = [&](const EpochRecord& rec) { on_epoch(v, rec); };
    ExperimentReport rep = train(net, train_set, test_set, tc, cb);
    rep.id = v;
    ExperimentConfig snap = c;
    snap.activation = v;
    rep.config = snap;
    res.runs.push_back(std::move(rep));
  }
  return res;
}

/// Loads the IDX files named in the config and takes the stratified subsets.
inline DataSplit load_benchmark_data(const ExperimentConfig& c) {
  const LabeledDataset tr = load_idx(c.train_images, c.train_labels);
  const LabeledDataset te = load_idx(c.test_images, c.test_labels);
  return {stratified_subset(tr, c.train_limit, c.seed), stratified_subset(te, c.test_limit, c.seed + 1)};
}

// ---------------------------------------------------------------------------
// Report files

enum class ReportFormat { csv, json, svg };

inline std::vector<ReportFormat> parse_formats(std::string_view list) {
  std::vector<ReportFormat> out;
  std::stringstream ss{std::string(list)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "csv") out.push_back(ReportFormat::csv);
    else if (item == "json") out.push_back(ReportFormat::json);
    else if (item == "svg") out.push_back(ReportFormat::svg);
    else throw ConfigError("unknown report format '" + item + "'");
  }
  return out;
}

/// header: epoch,train_loss,test_loss,train_acc,test_acc,seconds[,beta_layerK...]
inline std::string report_csv(const ExperimentReport& r, bool with_time = true) {
  std::string s = "epoch,train_loss,test_loss,train_acc,test_acc,seconds";
  for (const auto& b : r.beta_columns) s += "," + b;
  s += "\n";
  char buf[64];
  for (const auto& e : r.epochs) {
    s += std::to_string(e.epoch);
    for (double v : {e.train_loss, e.test_loss, e.train_acc, e.test_acc, with_time ? e.seconds : 0.0}) {
      std::snprintf(buf, sizeof buf, ",%.10g", v);
      s += buf;
    }
    for (double b : e.betas) {
      std::snprintf(buf, sizeof buf, ",%.10g", b);
      s += buf;
    }
    s += "\n";
  }
  return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

namespace detail {

inline Series epoch_series(const ExperimentReport& r, const std::string& name,
                           const std::function<double(const EpochRecord&)>& get) {
  Series s{name, {}, {}};
  for (const auto& e : r.epochs) {
    s.xs.push_back(e.epoch);
    s.ys.push_back(get(e));
  }
  return s;
}

}  // namespace detail

/// The four standard plots of one report: accuracy, loss, time, beta
/// (the last only when the network has squashing layers).
inline std::vector<std::pair<std::string, LinePlot>> report_plots(const ExperimentReport& r) {
  using detail::epoch_series;
  std::vector<std::pair<std::string, LinePlot>> plots;
  plots.push_back({"accuracy",
                   {r.id + ": accuracy", "epoch", "accuracy",
                    {epoch_series(r, "train", [](const EpochRecord& e) { return e.train_acc; }),
                     epoch_series(r, "test", [](const EpochRecord& e) { return e.test_acc; })}}});
  plots.push_back({"loss",
                   {r.id + ": loss", "epoch", "cross-entropy",
                    {epoch_series(r, "train", [](const EpochRecord& e) { return e.train_loss; }),
                     epoch_series(r, "test", [](const EpochRecord& e) { return e.test_loss; })}}});
  plots.push_back({"time",
                   {r.id + ": time per epoch", "epoch", "seconds",
                    {epoch_series(r, "epoch time", [](const EpochRecord& e) { return e.seconds; })}}});
  if (!r.beta_columns.empty()) {
    LinePlot p{r.id + ": beta", "epoch", "beta", {}};
    for (std::size_t k = 0; k < r.beta_columns.size(); ++k) {
      p.series.push_back(epoch_series(r, r.beta_columns[k], [k](const EpochRecord& e) { return e.betas.at(k); }));
    }
    plots.push_back({"beta", std::move(p)});
  }
  return plots;
}

/// Writes <dir>/<id>.csv, <id>.json and <id>_<plot>.svg. Returns the paths.
/// with_time = false zeroes the seconds everywhere.
inline std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                                                      const std::vector<ReportFormat>& formats,
                                                      bool with_time = true) {
  if (report.epochs.empty()) throw InvalidParameter("emit_report: report has no epochs");
  ExperimentReport r = report;
  if (!with_time) {
    for (auto& e : r.epochs) e.seconds = 0.0;
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const std::string stem = r.id.empty() ? "report" : r.id;
  std::vector<std::filesystem::path> written;
  for (ReportFormat f : formats) {
    switch (f) {
      case ReportFormat::csv:
        written.push_back(dir / (stem + ".csv"));
        write_text(written.back(), report_csv(r, with_time));
        break;
      case ReportFormat::json: {
        written.push_back(dir / (stem + ".json"));
        nlohmann::json j = r;
        write_text(written.back(), j.dump(2) + "\n");
        break;
      }
      case ReportFormat::svg:
        for (const auto& [name, plot] : report_plots(r)) {
          written.push_back(dir / (stem + "_" + name + ".svg"));
          write_text(written.back(), render_svg(plot));
        }
        break;
    }
  }
  return written;
}

inline std::vector<ReportFormat> all_formats() {
  return {ReportFormat::csv, ReportFormat::json, ReportFormat::svg};
}

/// variant,final_train_acc,final_test_acc,final_train_loss,final_test_loss,mean_seconds
inline std::string benchmark_summary_csv(const BenchmarkResult& b) {
  std::string s = "variant,final_train_acc,final_test_acc,final_train_loss,final_test_loss,mean_seconds\n";
  char buf[256];
  for (const auto& r : b.runs) {
    double t = 0.0;
    for (const auto& e : r.epochs) t += e.seconds;
    const auto& f = r.final();
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g,%.6g\n", r.id.c_str(), f.train_acc, f.test_acc,
                  f.train_loss, f.test_loss, t / static_cast<double>(r.epochs.size()));
    s += buf;
  }
  return s;
}

/// Per-variant reports plus comparison plots across variants.
inline std::vector<std::filesystem::path> emit_benchmark(const BenchmarkResult& b, const std::filesystem::path& dir,
                                                         const std::vector<ReportFormat>& formats) {
  std::vector<std::filesystem::path> written;
  for (const auto& r : b.runs) {
    auto w = emit_report(r, dir, formats);
    written.insert(written.end(), w.begin(), w.end());
  }
  written.push_back(dir / "summary.csv");
  write_text(written.back(), benchmark_summary_csv(b));
  const bool svg = std::find(formats.begin(), formats.end(), ReportFormat::svg) != formats.end();
  if (svg) {
    using detail::epoch_series;
    const std::vector<std::pair<std::string, std::function<double(const EpochRecord&)>>> metrics = {
        {"test_accuracy", [](const EpochRecord& e) { return e.test_acc; }},
        {"train_accuracy", [](const EpochRecord& e) { return e.train_acc; }},
        {"test_loss", [](const EpochRecord& e) { return e.test_loss; }},
        {"train_loss", [](const EpochRecord& e) { return e.train_loss; }},
        {"time", [](const EpochRecord& e) { return e.seconds; }}};
    for (const auto& [name, get] : metrics) {
      LinePlot p{"benchmark: " + name, "epoch", name, {}};
      for (const auto& r : b.runs) p.series.push_back(epoch_series(r, r.id, get));
      written.push_back(dir / ("compare_" + name + ".svg"));
      write_text(written.back(), render_svg(p));
    }
  }
  return written;
}

}  // namespace nilnet
