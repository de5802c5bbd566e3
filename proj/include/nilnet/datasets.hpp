#pragma once

// Deterministic 2-D classification datasets. Every generator is a pure
// function of its parameters and seed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "nilnet/dataset.hpp"
#include "nilnet/errors.hpp"

namespace nilnet {

// Bumped whenever a default geometry below changes.
inline constexpr int kDatasetDefaultsVersion = 1;

struct GaussianConfig {
  double center0_x = -1.5;
  double center0_y = -1.5;
  double center1_x = 1.5;
  double center1_y = 1.5;
  double sigma = 0.5;
};

// Class 0: disk of radius inner_radius. Class 1: annulus [outer_min, outer_max].
struct CircleConfig {
  double inner_radius = 1.0;
  double outer_min = 1.5;
  double outer_max = 2.0;
};

// Arm k: r = max_radius * t, theta = 2 pi turns t + k pi, t uniform in [t_min, 1].
struct SpiralConfig {
  double max_radius = 8.0;
  double t_min = 0.15;
};

struct Box {
  double x_min = -2.0;
  double x_max = 2.0;
  double y_min = -2.0;
  double y_max = 2.0;
};

enum class Sense { ge, le };

/// The half-plane  b*y >= m*x + c  (or <=).
struct LineSpec {
  double m = 0.0;
  double b = 1.0;
  double c = 0.0;
  Sense sense = Sense::ge;

  void validate() const {
    if (m == 0.0 && b == 0.0) {
      throw InvalidParameter("line: slope and y coefficients are both zero");
    }
  }

  bool holds(double x, double y) const {
    const double lhs = b * y;
    const double rhs = m * x + c;
    return sense == Sense::ge ? lhs >= rhs : lhs <= rhs;
  }

  bool operator==(const LineSpec&) const = default;
};

namespace detail {

inline LabeledDataset make_two_class(std::vector<std::pair<double, double>> pts, Labels labels,
                                     Provenance prov) {
  LabeledDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ds.features(static_cast<Eigen::Index>(i), 0) = pts[i].first;
    ds.features(static_cast<Eigen::Index>(i), 1) = pts[i].second;
  }
  ds.labels = std::move(labels);
  ds.n_classes = 2;
  ds.provenance = std::move(prov);
  return ds;
}

}  // namespace detail

/// Two isotropic Gaussian blobs, n_per_class points each.
inline LabeledDataset gen_gaussian(std::size_t n_per_class, std::uint64_t seed,
                                   const GaussianConfig& cfg = {}) {
  if (n_per_class < 1) throw InvalidParameter("gen_gaussian: n_per_class must be >= 1");
  if (!(cfg.sigma >= 0.0)) throw InvalidParameter("gen_gaussian: sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::pair<double, double>> pts;
  Labels labels;
  const double cx[2] = {cfg.center0_x, cfg.center1_x};
  const double cy[2] = {cfg.center0_y, cfg.center1_y};
  for (int k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const double x = cx[k] + cfg.sigma * noise(rng);
      const double y = cy[k] + cfg.sigma * noise(rng);
      pts.emplace_back(x, y);
      labels.push_back(k);
    }
  }
  return detail::make_two_class(std::move(pts), std::move(labels),
                                {"gaussian",
                                 seed,
                                 {{"n_per_class", static_cast<double>(n_per_class)},
                                  {"center0_x", cfg.center0_x},
                                  {"center0_y", cfg.center0_y},
                                  {"center1_x", cfg.center1_x},
                                  {"center1_y", cfg.center1_y},
                                  {"sigma", cfg.sigma},
                                  {"defaults_version", kDatasetDefaultsVersion}}});
}

/// Inner disk (class 0) against a surrounding annulus (class 1), both sampled
/// uniformly by area.
inline LabeledDataset gen_circle(std::size_t n_per_class, std::uint64_t seed,
                                 const CircleConfig& cfg = {}) {
  if (n_per_class < 1) throw InvalidParameter("gen_circle: n_per_class must be >= 1");
  if (!(cfg.inner_radius > 0.0) || cfg.outer_min - cfg.inner_radius < 0.3 ||
      !(cfg.outer_max > cfg.outer_min)) {
    throw InvalidParameter("gen_circle: need inner_radius > 0, a radius gap >= 0.3, outer_max > outer_min");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, double>> pts;
  Labels labels;
  const double r_lo[2] = {0.0, cfg.outer_min};
  const double r_hi[2] = {cfg.inner_radius, cfg.outer_max};
  for (int k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const double u = unit(rng);
      const double r = std::sqrt(r_lo[k] * r_lo[k] + u * (r_hi[k] * r_hi[k] - r_lo[k] * r_lo[k]));
      const double theta = 2.0 * std::numbers::pi * unit(rng);
      pts.emplace_back(r * std::cos(theta), r * std::sin(theta));
      labels.push_back(k);
    }
  }
  return detail::make_two_class(std::move(pts), std::move(labels),
                                {"circle",
                                 seed,
                                 {{"n_per_class", static_cast<double>(n_per_class)},
                                  {"inner_radius", cfg.inner_radius},
                                  {"outer_min", cfg.outer_min},
                                  {"outer_max", cfg.outer_max},
                                  {"defaults_version", kDatasetDefaultsVersion}}});
}

/// Point on spiral arm `arm` (0 or 1) at curve parameter t.
inline std::pair<double, double> spiral_point(int arm, double t, double turns, const SpiralConfig& cfg = {}) {
  const double r = cfg.max_radius * t;
  const double theta = 2.0 * std::numbers::pi * turns * t + arm * std::numbers::pi;
  return {r * std::cos(theta), r * std::sin(theta)};
}

/// Two interleaved Archimedean spiral arms offset by pi, with isotropic
/// Gaussian noise of standard deviation `noise`.
inline LabeledDataset gen_spiral(std::size_t n_per_class, double turns, double noise, std::uint64_t seed,
                                 const SpiralConfig& cfg = {}) {
  if (n_per_class < 1) throw InvalidParameter("gen_spiral: n_per_class must be >= 1");
  if (!(turns > 0.0)) throw InvalidParameter("gen_spiral: turns must be > 0");
  if (!(noise >= 0.0)) throw InvalidParameter("gen_spiral: noise must be >= 0");
  if (!(cfg.t_min >= 0.0 && cfg.t_min < 1.0) || !(cfg.max_radius > 0.0)) {
    throw InvalidParameter("gen_spiral: need 0 <= t_min < 1 and max_radius > 0");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> param(cfg.t_min, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::vector<std::pair<double, double>> pts;
  Labels labels;
  for (int k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      auto [x, y] = spiral_point(k, param(rng), turns, cfg);
      if (noise > 0.0) {
        x += noise * jitter(rng);
        y += noise * jitter(rng);
      }
      pts.emplace_back(x, y);
      labels.push_back(k);
    }
  }
  return detail::make_two_class(std::move(pts), std::move(labels),
                                {"spiral",
                                 seed,
                                 {{"n_per_class", static_cast<double>(n_per_class)},
                                  {"turns", turns},
                                  {"noise", noise},
                                  {"max_radius", cfg.max_radius},
                                  {"t_min", cfg.t_min},
                                  {"defaults_version", kDatasetDefaultsVersion}}});
}

inline bool in_region(const std::vector<LineSpec>& lines, double x, double y) {
  return std::all_of(lines.begin(), lines.end(), [&](const LineSpec& l) { return l.holds(x, y); });
}

/// n points uniform over `box`; label 1 iff every inequality holds.
inline LabeledDataset gen_halfplane_region(const std::vector<LineSpec>& lines, std::size_t n,
                                           const Box& box, std::uint64_t seed) {
  if (lines.empty()) throw InvalidParameter("gen_halfplane_region: need at least one line");
  for (const auto& l : lines) l.validate();
  if (n < 2) throw InvalidParameter("gen_halfplane_region: need n >= 2");
  if (!(box.x_max > box.x_min) || !(box.y_max > box.y_min)) {
    throw InvalidParameter("gen_halfplane_region: degenerate box");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.x_min, box.x_max);
  std::uniform_real_distribution<double> uy(box.y_min, box.y_max);
  std::vector<std::pair<double, double>> pts;
  Labels labels;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    const bool inside = in_region(lines, x, y);
    positives += inside ? 1 : 0;
    pts.emplace_back(x, y);
    labels.push_back(inside ? 1 : 0);
  }
  if (positives == 0) {
    throw InvalidParameter("gen_halfplane_region: region is empty within the box after " +
                           std::to_string(n) + " samples");
  }
  if (positives == n) {
    throw InvalidParameter("gen_halfplane_region: region covers every sample; no negative class");
  }
  Provenance prov{"halfplane_region", seed, {{"n", static_cast<double>(n)},
                                             {"x_min", box.x_min},
                                             {"x_max", box.x_max},
                                             {"y_min", box.y_min},
                                             {"y_max", box.y_max}}};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string p = "line" + std::to_string(i + 1) + "_";
    prov.params.emplace_back(p + "m", lines[i].m);
    prov.params.emplace_back(p + "b", lines[i].b);
    prov.params.emplace_back(p + "c", lines[i].c);
    prov.params.emplace_back(p + "ge", lines[i].sense == Sense::ge ? 1.0 : 0.0);
  }
  return detail::make_two_class(std::move(pts), std::move(labels), std::move(prov));
}

/// An open wedge reaching the right edge of the default box.
inline std::vector<LineSpec> default_two_lines() {
  return {{-0.5, 1.0, 0.2, Sense::ge}, {1.5, 1.0, -0.3, Sense::le}};
}

/// A trapezoid in the middle of the default box.
inline std::vector<LineSpec> default_four_lines() {
  return {{0.0, 1.0, -1.0, Sense::ge},
          {0.0, 1.0, 1.0, Sense::le},
          {2.0, 1.0, 2.5, Sense::le},
          {-2.0, 1.0, 2.5, Sense::le}};
}

/// Stratified, deterministic train/test split.
inline std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, double test_fraction,
                                                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidParameter("split: test_fraction must lie in (0,1)");
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.n_classes));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t k = 0; k < by_class.size(); ++k) {
    auto& idx = by_class[k];
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      throw InvalidParameter("split: class " + std::to_string(k) + " has fewer than 2 items");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {ds.subset(train_idx), ds.subset(test_idx)};
}

/// Stratified sample of `count` items (class proportions preserved up to rounding).
inline LabeledDataset stratified_subset(const LabeledDataset& ds, std::size_t count, std::uint64_t seed) {
  if (count >= ds.size()) return ds;
  if (count == 0) throw InvalidParameter("stratified_subset: count must be positive");
  const double keep = static_cast<double>(count) / static_cast<double>(ds.size());
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.n_classes));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> picked;
  for (auto& idx : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto take = std::min(idx.size(), static_cast<std::size_t>(std::llround(keep * static_cast<double>(idx.size()))));
    picked.insert(picked.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(picked.begin(), picked.end());
  return ds.subset(picked);
}

/// CSV with header x1,...,xd,label; features printed with 9 significant digits.
inline void write_csv(const LabeledDataset& ds, std::ostream& out) {
  for (std::size_t j = 0; j < ds.dims(); ++j) {
    out << 'x' << (j + 1) << ',';
  }
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dims(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out << buf << ',';
    }
    out << ds.labels[i] << '\n';
  }
}

}  // namespace nilnet
