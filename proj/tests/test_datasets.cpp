#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <tuple>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "nilnet/datasets.hpp"
#include "nilnet/idx.hpp"

using namespace nilnet;

namespace {

bool same(const LabeledDataset& a, const LabeledDataset& b) {
  return a.features == b.features && a.labels == b.labels && a.n_classes == b.n_classes;
}

// Rosenblatt perceptron with bias; true if it reaches zero training errors.
bool perceptron_separates(const LabeledDataset& ds, int max_epochs = 1000) {
  double w0 = 0, w1 = 0, b = 0;
  for (int e = 0; e < max_epochs; ++e) {
    int mistakes = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double t = ds.labels[i] == 1 ? 1.0 : -1.0;
      if (t * (w0 * ds.features(r, 0) + w1 * ds.features(r, 1) + b) <= 0) {
        w0 += t * ds.features(r, 0);
        w1 += t * ds.features(r, 1);
        b += t;
        ++mistakes;
      }
    }
    if (mistakes == 0) return true;
  }
  return false;
}

double distance_to_arm(double x, double y, int arm, double turns) {
  double best = 1e300;
  for (int i = 0; i <= 20000; ++i) {
    const auto [px, py] = spiral_point(arm, i / 20000.0, turns);
    best = std::min(best, std::hypot(x - px, y - py));
  }
  return best;
}

}  // namespace

TEST(Gaussian, CountsAndDeterminism) {
  const LabeledDataset ds = gen_gaussian(250, 4);
  EXPECT_EQ(ds.size(), 500u);
  EXPECT_EQ(ds.class_counts(), (std::vector<std::size_t>{250, 250}));
  EXPECT_TRUE(same(ds, gen_gaussian(250, 4)));
  EXPECT_FALSE(same(ds, gen_gaussian(250, 5)));
  EXPECT_NO_THROW(ds.validate());
  EXPECT_EQ(ds.provenance.generator, "gaussian");
  EXPECT_EQ(ds.provenance.seed, 4u);
  EXPECT_THROW(gen_gaussian(0, 1), InvalidParameter);
}

TEST(Gaussian, LinearlySeparableAtDefaults) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EXPECT_TRUE(perceptron_separates(gen_gaussian(250, seed))) << seed;
  }
}

TEST(Circle, GapAndRadialOracle) {
  const LabeledDataset ds = gen_circle(250, 3);
  EXPECT_EQ(ds.class_counts(), (std::vector<std::size_t>{250, 250}));
  double max_inner = 0, min_outer = 1e9;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double rad = std::hypot(ds.features(r, 0), ds.features(r, 1));
    if (ds.labels[i] == 0) max_inner = std::max(max_inner, rad);
    else min_outer = std::min(min_outer, rad);
    EXPECT_EQ(rad < 1.25 ? 0 : 1, ds.labels[i]);
  }
  EXPECT_LT(max_inner, min_outer);
  EXPECT_GE(min_outer - max_inner, 0.3);
  EXPECT_TRUE(same(ds, gen_circle(250, 3)));
  EXPECT_THROW(gen_circle(10, 1, {1.0, 1.2, 2.0}), InvalidParameter);
}

TEST(Spiral, NearestArmOracleWithoutNoise) {
  const LabeledDataset ds = gen_spiral(100, 1.0, 0.0, 6);
  EXPECT_EQ(ds.class_counts(), (std::vector<std::size_t>{100, 100}));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double x = ds.features(r, 0), y = ds.features(r, 1);
    const int nearest = distance_to_arm(x, y, 0, 1.0) < distance_to_arm(x, y, 1, 1.0) ? 0 : 1;
    EXPECT_EQ(nearest, ds.labels[i]);
  }
}

TEST(Spiral, DeterministicAndValidated) {
  EXPECT_TRUE(same(gen_spiral(50, 1.5, 0.2, 2), gen_spiral(50, 1.5, 0.2, 2)));
  EXPECT_FALSE(same(gen_spiral(50, 1.5, 0.2, 2), gen_spiral(50, 1.5, 0.2, 3)));
  EXPECT_THROW(gen_spiral(50, 0.0, 0.1, 1), InvalidParameter);
  EXPECT_THROW(gen_spiral(50, 1.0, -0.1, 1), InvalidParameter);
}

TEST(Spiral, ArmsOffsetByPi) {
  for (double t : {0.2, 0.5, 0.9}) {
    const auto [x0, y0] = spiral_point(0, t, 1.0);
    const auto [x1, y1] = spiral_point(1, t, 1.0);
    EXPECT_NEAR(x0, -x1, 1e-12);
    EXPECT_NEAR(y0, -y1, 1e-12);
  }
}

TEST(HalfplaneRegion, LabelsFollowInequalities) {
  for (const auto& lines : {default_two_lines(), default_four_lines(), std::vector<LineSpec>{{1.0, 1.0, 0.0, Sense::ge}}}) {
    const LabeledDataset ds = gen_halfplane_region(lines, 1000, Box{}, 8);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      bool all = true;
      for (const auto& l : lines) {
        const double lhs = l.b * ds.features(r, 1), rhs = l.m * ds.features(r, 0) + l.c;
        all = all && (l.sense == Sense::ge ? lhs >= rhs : lhs <= rhs);
      }
      EXPECT_EQ(all ? 1 : 0, ds.labels[i]);
      EXPECT_GE(ds.features(r, 0), -2.0);
      EXPECT_LE(ds.features(r, 1), 2.0);
    }
  }
}

TEST(HalfplaneRegion, FourLineAreaStrictlyInside) {
  // trapezoid |y| <= 1, y <= 2x + 2.5, y <= -2x + 2.5: parallel sides 3.5 and 1.5, height 2
  const LabeledDataset ds = gen_halfplane_region(default_four_lines(), 20000, Box{}, 1);
  const double frac = static_cast<double>(ds.class_counts()[1]) / 20000.0;
  EXPECT_GT(frac, 0.0);
  EXPECT_LT(frac, 1.0);
  EXPECT_NEAR(frac, 5.0 / 16.0, 0.015);
}

TEST(HalfplaneRegion, Errors) {
  EXPECT_THROW(gen_halfplane_region({}, 10, Box{}, 1), InvalidParameter);
  EXPECT_THROW(gen_halfplane_region({{0.0, 1.0, 10.0, Sense::ge}}, 100, Box{}, 1), InvalidParameter);
  EXPECT_THROW(gen_halfplane_region({{0.0, 0.0, 1.0, Sense::ge}}, 100, Box{}, 1), InvalidParameter);
}

TEST(Split, StratifiedCounts) {
  const auto [tr, te] = split(gen_gaussian(250, 1), 0.2, 1);
  EXPECT_EQ(tr.size(), 400u);
  EXPECT_EQ(te.size(), 100u);
  EXPECT_EQ(te.class_counts(), (std::vector<std::size_t>{50, 50}));
}

TEST(Split, DisjointExhaustiveDeterministic) {
  const LabeledDataset ds = gen_circle(37, 2);
  const auto [tr, te] = split(ds, 0.3, 9);
  std::multiset<std::tuple<double, double, int>> all, parts;
  auto add = [](auto& set, const LabeledDataset& d) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      set.insert({d.features(r, 0), d.features(r, 1), d.labels[i]});
    }
  };
  add(all, ds);
  add(parts, tr);
  add(parts, te);
  EXPECT_EQ(all, parts);
  const auto [tr2, te2] = split(ds, 0.3, 9);
  EXPECT_TRUE(same(tr, tr2));
  EXPECT_TRUE(same(te, te2));
}

TEST(Split, Errors) {
  const LabeledDataset ds = gen_gaussian(1, 1);
  EXPECT_THROW(split(ds, 0.5, 1), InvalidParameter);
  EXPECT_THROW(split(gen_gaussian(10, 1), 0.0, 1), InvalidParameter);
  EXPECT_THROW(split(gen_gaussian(10, 1), 1.0, 1), InvalidParameter);
}

TEST(StratifiedSubset, KeepsProportions) {
  LabeledDataset ds;
  ds.n_classes = 3;
  ds.features = Matrix::Zero(300, 1);
  for (int i = 0; i < 300; ++i) {
    ds.features(i, 0) = i;
    ds.labels.push_back(i < 150 ? 0 : (i < 240 ? 1 : 2));
  }
  const LabeledDataset s = stratified_subset(ds, 100, 3);
  EXPECT_EQ(s.class_counts(), (std::vector<std::size_t>{50, 30, 20}));
}

TEST(Csv, HeaderAndPrecision) {
  LabeledDataset ds;
  ds.n_classes = 2;
  ds.features.resize(2, 2);
  ds.features << 1.0 / 3.0, -2.5, 1e-7, 123456789.123;
  ds.labels = {0, 1};
  std::ostringstream out;
  write_csv(ds, out);
  EXPECT_EQ(out.str(), "x1,x2,label\n0.333333333,-2.5,0\n1e-07,123456789,1\n");
}

// ---------------------------------------------------------------------------
// IDX

namespace {

Bytes fixture_images() {
  // 2 images of 2x3
  return {0x00, 0x00, 0x08, 0x03, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 3,
          0, 255, 128, 1, 2, 3, 10, 20, 30, 40, 50, 60};
}

Bytes fixture_labels() { return {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 2, 7, 3}; }

}  // namespace

TEST(Idx, HandCraftedFixture) {
  const IdxImages img = parse_idx_images(fixture_images());
  EXPECT_EQ(img.count, 2u);
  EXPECT_EQ(img.rows, 2u);
  EXPECT_EQ(img.cols, 3u);
  const LabeledDataset ds = idx_to_dataset(img, parse_idx_labels(fixture_labels()), 100);
  ASSERT_EQ(ds.size(), 2u);
  ASSERT_EQ(ds.dims(), 6u);
  EXPECT_EQ(ds.features(0, 0), 0.0);
  EXPECT_EQ(ds.features(0, 1), 1.0);
  EXPECT_EQ(ds.features(0, 2), 128.0 / 255.0);
  EXPECT_EQ(ds.features(0, 3), 1.0 / 255.0);
  EXPECT_EQ(ds.features(1, 5), 60.0 / 255.0);
  EXPECT_EQ(ds.labels, (Labels{7, 3}));
  EXPECT_EQ(ds.n_classes, 8);
  EXPECT_EQ(idx_to_dataset(img, parse_idx_labels(fixture_labels()), 1).size(), 1u);
}

TEST(Idx, ErrorKinds) {
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const IdxError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no IdxError";
    return IdxError::Kind::io;
  };
  Bytes bad = fixture_images();
  bad[3] = 0x01;
  EXPECT_EQ(kind_of([&] { parse_idx_images(bad); }), IdxError::Kind::bad_magic);
  EXPECT_EQ(kind_of([&] { parse_idx_labels(fixture_images()); }), IdxError::Kind::bad_magic);
  Bytes shortimg = fixture_images();
  shortimg.pop_back();
  EXPECT_EQ(kind_of([&] { parse_idx_images(shortimg); }), IdxError::Kind::truncated);
  EXPECT_EQ(kind_of([&] { parse_idx_images(Bytes{0, 0, 8}); }), IdxError::Kind::truncated);
  Bytes shortlbl = fixture_labels();
  shortlbl.pop_back();
  EXPECT_EQ(kind_of([&] { parse_idx_labels(shortlbl); }), IdxError::Kind::truncated);
  const Bytes three_labels{0x00, 0x00, 0x08, 0x01, 0, 0, 0, 3, 1, 2, 3};
  EXPECT_EQ(kind_of([&] { idx_to_dataset(parse_idx_images(fixture_images()), parse_idx_labels(three_labels), 10); }),
            IdxError::Kind::count_mismatch);
  EXPECT_EQ(kind_of([&] { load_idx("/nonexistent/a", "/nonexistent/b"); }), IdxError::Kind::io);
}

TEST(Idx, FileRoundTrip) {
  LabeledDataset ds;
  ds.n_classes = 10;
  ds.features.resize(5, 12);
  for (Eigen::Index i = 0; i < ds.features.size(); ++i) ds.features.data()[i] = static_cast<double>((i * 37) % 256) / 255.0;
  ds.labels = {0, 9, 4, 4, 1};
  const auto dir = std::filesystem::temp_directory_path() / "nilnet_idx_test";
  std::filesystem::create_directories(dir);
  write_file_bytes(dir / "img", encode_idx_images(ds, 3, 4));
  write_file_bytes(dir / "lbl", encode_idx_labels(ds));
  const LabeledDataset back = load_idx(dir / "img", dir / "lbl");
  EXPECT_TRUE(back.features == ds.features);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(load_idx(dir / "img", dir / "lbl", 3).size(), 3u);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(encode_idx_images(ds, 5, 5), ShapeError);
}
