// nilnet command line: dataset export, toy and gate experiments, the
// activation benchmark and report re-rendering.
//
// exit codes: 0 ok, 2 bad config/arguments, 3 training diverged, 4 I/O error

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nilnet/harness.hpp"

namespace fs = std::filesystem;
using namespace nilnet;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> config;
  bool verbose = false;
};

struct Overrides {
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<double> beta0;
  std::optional<double> beta_gate;
  std::optional<std::size_t> batch;
  std::optional<std::string> activation;
  std::optional<std::string> init;
  std::string formats = "csv,json,svg";
  bool no_time = false;
};

ExperimentConfig resolve(const std::string& experiment, const Globals& g, const Overrides& o) {
  ExperimentConfig c = default_config(experiment, g.seed.value_or(1));
  if (g.config) {
    std::ifstream in(*g.config);
    if (!in) throw IoError("cannot open config " + *g.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(*g.config + ": " + e.what());
    }
    if (j.is_object() && j.contains("experiment") && j["experiment"] != experiment) {
      throw ConfigError("config is for experiment " + j["experiment"].dump() + ", not '" + experiment + "'");
    }
    from_json(j, c);
  }
  if (g.seed) c.seed = *g.seed;
  if (g.out) c.out_dir = *g.out;
  if (o.epochs) c.epochs = *o.epochs;
  if (o.lr) c.learning_rate = *o.lr;
  if (o.beta0) c.beta0 = *o.beta0;
  if (o.beta_gate) c.beta_gate = *o.beta_gate;
  if (o.batch) c.batch_size = *o.batch;
  if (o.activation) c.activation = *o.activation;
  if (o.init) c.init_scheme = *o.init;
  c.validate();
  return c;
}

TrainCallbacks progress(const Globals& g, const std::string& tag) {
  TrainCallbacks cb;
  if (g.verbose) {
    cb.on_epoch = [tag](const EpochRecord& e) {
      std::fprintf(stderr, "[%s] epoch %d  loss %.5f/%.5f  acc %.4f/%.4f\n", tag.c_str(), e.epoch, e.train_loss,
                   e.test_loss, e.train_acc, e.test_acc);
    };
  }
  return cb;
}

void print_final(const ExperimentReport& r) {
  const auto& f = r.final();
  std::printf("%s: epochs %d  train acc %.4f  test acc %.4f  train loss %.4f  test loss %.4f", r.id.c_str(),
              f.epoch, f.train_acc, f.test_acc, f.train_loss, f.test_loss);
  for (std::size_t k = 0; k < f.betas.size(); ++k) {
    std::printf("  %s %.4f", r.beta_columns[k].c_str(), f.betas[k]);
  }
  std::printf("\n");
}

void add_train_flags(CLI::App* sub, Overrides& o) {
  sub->add_option("--epochs", o.epochs, "Training epochs");
  sub->add_option("--lr", o.lr, "Learning rate");
  sub->add_option("--beta0", o.beta0, "Initial squashing beta");
  sub->add_option("--batch-size", o.batch, "Mini-batch size (0 = full batch)");
  sub->add_option("--init", o.init, "Weight init: glorot_uniform|he_uniform|zeros");
  sub->add_option("--formats", o.formats, "Comma list of csv,json,svg")->capture_default_str();
  sub->add_flag("--no-time", o.no_time, "Write 0 for epoch seconds (byte-stable output)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nilnet: squashing activations and nilpotent logic networks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for data, split, init and batch order");
  app.add_option("--out", g.out, "Output directory (gen-data: file or directory)");
  app.add_option("--config", g.config, "JSON config file (flat keys)");
  app.add_flag("-v,--verbose", g.verbose, "Per-epoch progress on stderr");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
  std::string gen_kind;
  std::optional<std::size_t> gen_n, gen_points;
  std::optional<double> gen_turns, gen_noise;
  gen->add_option("kind", gen_kind, "gaussian|circle|spiral|two_line|four_line")->required();
  gen->add_option("--n-per-class", gen_n, "Points per class (gaussian, circle, spiral)");
  gen->add_option("--n-points", gen_points, "Points (two_line, four_line)");
  gen->add_option("--turns", gen_turns, "Spiral turns");
  gen->add_option("--noise", gen_noise, "Spiral noise");

  // toy
  auto* toy = app.add_subcommand("toy", "Gaussian, circle or spiral experiment");
  std::string toy_kind;
  Overrides toy_o;
  toy->add_option("experiment", toy_kind, "gaussian|circle|spiral")->required()->check(
      CLI::IsMember({"gaussian", "circle", "spiral"}));
  add_train_flags(toy, toy_o);

  // gates
  auto* gates = app.add_subcommand("gates", "Frozen AND-gate region experiment");
  std::string gate_kind;
  Overrides gate_o;
  gates->add_option("experiment", gate_kind, "two_line|four_line")->required()->check(
      CLI::IsMember({"two_line", "four_line"}));
  gates->add_option("--activation", gate_o.activation, "squashing|relu|sigmoid|tanh");
  gates->add_option("--beta-gate", gate_o.beta_gate, "Initial beta of the AND layer");
  add_train_flags(gates, gate_o);

  // bench
  auto* bench = app.add_subcommand("bench", "Activation benchmark on IDX image data");
  Overrides bench_o;
  std::optional<std::string> tr_img, tr_lbl, te_img, te_lbl;
  std::optional<std::size_t> tr_lim, te_lim;
  std::optional<std::vector<std::string>> variants;
  bench->add_option("--train-images", tr_img, "IDX image file (training)");
  bench->add_option("--train-labels", tr_lbl, "IDX label file (training)");
  bench->add_option("--test-images", te_img, "IDX image file (test)");
  bench->add_option("--test-labels", te_lbl, "IDX label file (test)");
  bench->add_option("--train-limit", tr_lim, "Stratified training subset size");
  bench->add_option("--test-limit", te_lim, "Stratified test subset size");
  bench->add_option("--variants", variants, "Activations to compare")->delimiter(',');
  add_train_flags(bench, bench_o);

  // report
  auto* rep = app.add_subcommand("report", "Re-render CSV/SVG from a report JSON");
  std::string rep_in;
  std::string rep_formats = "csv,svg";
  rep->add_option("report", rep_in, "Report JSON written by toy, gates or bench")->required();
  rep->add_option("--formats", rep_formats, "Comma list of csv,json,svg")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) {
      ExperimentConfig c = resolve(gen_kind, g, {});
      if (gen_n) c.n_per_class = *gen_n;
      if (gen_points) c.n_points = *gen_points;
      if (gen_turns) c.turns = *gen_turns;
      if (gen_noise) c.noise = *gen_noise;
      if (!c.is_toy() && !c.is_gate()) throw ConfigError("gen-data: no generator for '" + gen_kind + "'");
      const LabeledDataset ds = generate_dataset(c);
      fs::path out = g.out ? fs::path(*g.out) : fs::path(c.out_dir);
      if (out.extension() != ".csv") out /= gen_kind + ".csv";
      std::ostringstream ss;
      write_csv(ds, ss);
      write_text(out, ss.str());
      std::printf("%s: %zu points -> %s\n", gen_kind.c_str(), ds.size(), out.string().c_str());
    } else if (*toy) {
      const ExperimentConfig c = resolve(toy_kind, g, toy_o);
      const ExperimentReport r = run_toy_experiment(c, progress(g, toy_kind));
      emit_report(r, c.out_dir, parse_formats(toy_o.formats), !toy_o.no_time);
      print_final(r);
    } else if (*gates) {
      const ExperimentConfig c = resolve(gate_kind, g, gate_o);
      const GateResult r = run_gate_experiment(c, progress(g, gate_kind));
      emit_report(r.report, c.out_dir, parse_formats(gate_o.formats), !gate_o.no_time);
      write_text(fs::path(c.out_dir) / (gate_kind + "_explanation.json"), gate_summary_json(r).dump(2) + "\n");
      write_text(fs::path(c.out_dir) / (gate_kind + "_explanation.txt"), r.explanation.text());
      print_final(r.report);
      std::printf("initial train loss %.4f  crisp acc %.4f  explanation acc %.4f  gate intact %s\n", r.initial_loss,
                  r.crisp_accuracy, r.explanation_accuracy, r.gate_intact ? "yes" : "no");
      std::fputs(r.explanation.text().c_str(), stdout);
    } else if (*bench) {
      ExperimentConfig c = resolve("bench", g, bench_o);
      if (tr_img) c.train_images = *tr_img;
      if (tr_lbl) c.train_labels = *tr_lbl;
      if (te_img) c.test_images = *te_img;
      if (te_lbl) c.test_labels = *te_lbl;
      if (tr_lim) c.train_limit = *tr_lim;
      if (te_lim) c.test_limit = *te_lim;
      if (variants) c.variants = *variants;
      c.validate();
      if (c.train_images.empty() || c.train_labels.empty() || c.test_images.empty() || c.test_labels.empty()) {
        throw ConfigError("bench: --train-images, --train-labels, --test-images and --test-labels are required");
      }
      const DataSplit data = load_benchmark_data(c);
      std::function<void(const std::string&, const EpochRecord&)> on_epoch;
      if (g.verbose) {
        on_epoch = [](const std::string& v, const EpochRecord& e) {
          std::fprintf(stderr, "[%s] epoch %d  test acc %.4f  %.2fs\n", v.c_str(), e.epoch, e.test_acc, e.seconds);
        };
      }
      const BenchmarkResult b = run_activation_benchmark(data.train, data.test, c, on_epoch);
      emit_benchmark(b, c.out_dir, parse_formats(bench_o.formats));
      std::fputs(benchmark_summary_csv(b).c_str(), stdout);
    } else if (*rep) {
      std::ifstream in(rep_in);
      if (!in) throw IoError("cannot open " + rep_in);
      ExperimentReport r;
      try {
        r = nlohmann::json::parse(in).get<ExperimentReport>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(rep_in + ": " + e.what());
      }
      const fs::path out = g.out ? fs::path(*g.out) : fs::path(rep_in).parent_path();
      for (const auto& p : emit_report(r, out, parse_formats(rep_formats))) {
        std::printf("%s\n", p.string().c_str());
      }
    }
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDivergence;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const IdxError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
  return 0;
}
