#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nilnet/logic_gates.hpp"
#include "nilnet/train.hpp"

using namespace nilnet;

namespace {

Network gate_net(std::size_t k, std::uint64_t seed = 1, double b1 = 0.1, double bg = 0.1) {
  std::mt19937_64 rng(seed);
  GateNetworkSpec spec;
  spec.k = k;
  spec.beta_layer1 = b1;
  spec.beta_gate = bg;
  return build_gate_network(spec, rng);
}

double soft_output(const Network& net, double x, double y) {
  Matrix p(1, 2);
  p << x, y;
  return forward(net, p).cache.back().post(0, 0);
}

// Boolean inputs of index `bits` as doubles.
std::vector<double> bool_inputs(std::size_t k, unsigned bits) {
  std::vector<double> g(k);
  for (std::size_t i = 0; i < k; ++i) g[i] = (bits >> i) & 1u ? 1.0 : 0.0;
  return g;
}

}  // namespace

TEST(BuildGate, LayerShapesAndFrozenGate) {
  const Network n2 = gate_net(2);
  ASSERT_EQ(n2.layers.size(), 2u);
  EXPECT_EQ(n2.layers[0].fan_in(), 2);
  EXPECT_EQ(n2.layers[0].fan_out(), 2);
  EXPECT_TRUE(n2.layers[1].weights == Matrix::Ones(1, 2));
  EXPECT_EQ(n2.layers[1].bias(0), -1.0);
  EXPECT_FALSE(n2.layers[1].trainable_weights);
  EXPECT_FALSE(n2.layers[1].trainable_bias);
  EXPECT_TRUE(n2.layers[1].trainable_beta);
  EXPECT_TRUE(n2.layers[0].trainable_beta);
  EXPECT_EQ(n2.head, OutputHead::binary_gate);
  EXPECT_TRUE(gate_is_intact(n2));

  EXPECT_EQ(gate_net(4).layers[1].bias(0), -3.0);
  EXPECT_EQ(gate_net(1).layers[1].bias(0), 0.0);
  EXPECT_THROW(gate_net(0), InvalidParameter);
}

TEST(BuildGate, SeparateBetas) {
  const Network n = gate_net(3, 1, 0.25, -0.5);
  EXPECT_EQ(n.layers[0].beta, 0.25);
  EXPECT_EQ(n.layers[1].beta, -0.5);
  EXPECT_EQ(n.layers[0].activation.a, 0.5);
  EXPECT_EQ(n.layers[0].activation.lambda, 1.0);
}

TEST(BuildGate, OtherActivations) {
  std::mt19937_64 rng(1);
  GateNetworkSpec spec;
  spec.k = 4;
  spec.activation = Activation::relu;
  const Network n = build_gate_network(spec, rng);
  EXPECT_EQ(n.layers[0].activation.type, Activation::relu);
  EXPECT_EQ(n.layers[1].activation.type, Activation::relu);
  EXPECT_TRUE(gate_is_intact(n));
}

TEST(BuildGate, GateStaysFrozenThroughTraining) {
  const LabeledDataset ds = gen_halfplane_region(default_two_lines(), 200, Box{}, 3);
  Network net = gate_net(2, 3);
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.learning_rate = 0.02;
  train(net, ds, ds, cfg);
  EXPECT_TRUE(gate_is_intact(net));
  EXPECT_NE(net.layers[1].beta, 0.1);
}

TEST(Flatten, FourInputTree) {
  const AndTree t = AndTree::both(AndTree::both(AndTree::leaf(0), AndTree::leaf(1)),
                                  AndTree::both(AndTree::leaf(2), AndTree::leaf(3)));
  const NilpotentOperatorSpec s = flatten_and_tree(t);
  EXPECT_EQ(s.weights(), (std::vector<double>{1, 1, 1, 1}));
  EXPECT_EQ(s.bias(), -3.0);
  const std::vector<double> ones(4, 1.0);
  EXPECT_EQ(eval_and_tree(t, ones), 1.0);
  EXPECT_EQ(weighted_operator(ones, s, GeneratorFn::identity()), 1.0);
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<double> g = ones;
    g[i] = 0.0;
    EXPECT_EQ(eval_and_tree(t, g), 0.0);
    EXPECT_EQ(weighted_operator(g, s, GeneratorFn::identity()), 0.0);
  }
}

TEST(Flatten, ExhaustiveBalancedAndChainTrees) {
  for (std::size_t k = 1; k <= 8; ++k) {
    AndTree chain = AndTree::leaf(0);
    for (std::size_t i = 1; i < k; ++i) chain = AndTree::both(chain, AndTree::leaf(i));
    for (const AndTree& t : {AndTree::balanced(k), chain}) {
      const auto s = flatten_and_tree(t);
      for (unsigned bits = 0; bits < (1u << k); ++bits) {
        const auto g = bool_inputs(k, bits);
        EXPECT_EQ(eval_and_tree(t, g), weighted_operator(g, s, GeneratorFn::identity())) << k << " " << bits;
      }
    }
  }
}

TEST(Flatten, RejectsRepeatedOrMissingInputs) {
  EXPECT_THROW(flatten_and_tree(AndTree::both(AndTree::leaf(0), AndTree::leaf(0))), InvalidParameter);
  EXPECT_THROW(flatten_and_tree(AndTree::both(AndTree::leaf(0), AndTree::leaf(2))), InvalidParameter);
  EXPECT_THROW(AndTree::balanced(0), InvalidParameter);
  const std::vector<double> one(1, 1.0);
  EXPECT_THROW(eval_and_tree(AndTree::balanced(3), one), ShapeError);
}

TEST(CrispRegion, PlantedLinesGiveIntersection) {
  for (std::size_t which : {2u, 4u}) {
    const auto lines = which == 2 ? default_two_lines() : default_four_lines();
    Network net = gate_net(which, 5, 2.0, 2.0);
    plant_lines(net, lines, 1e4);
    const auto region = crisp_decision_region(net);
    int checked = 0;
    for (int i = 0; i <= 200; ++i) {
      for (int j = 0; j <= 200; ++j) {
        const double x = -2 + 4.0 * i / 200.0 + 1e-3, y = -2 + 4.0 * j / 200.0 + 1.3e-3;
        // stay clear of the band of width ~1/sharpness around each line
        bool near = false;
        for (const auto& l : lines) near = near || std::abs(l.b * y - l.m * x - l.c) < 1e-3;
        if (near) continue;
        EXPECT_EQ(region(x, y), in_region(lines, x, y)) << x << "," << y;
        ++checked;
      }
    }
    EXPECT_GT(checked, 39000);
  }
}

TEST(CrispRegion, SingleLine) {
  const std::vector<LineSpec> line{{0.5, 1.0, 0.2, Sense::le}};
  Network net = gate_net(1, 2, 3.0, 3.0);
  plant_lines(net, line, 1e4);
  const auto region = crisp_decision_region(net);
  for (double x = -2; x <= 2; x += 0.17) {
    for (double y = -2; y <= 2; y += 0.13) {
      if (std::abs(y - 0.5 * x - 0.2) < 1e-3) continue;
      EXPECT_EQ(region(x, y), line[0].holds(x, y));
    }
  }
}

TEST(CrispRegion, NegatedGateBetaIsComplement) {
  Network net = gate_net(3, 11, 1.5, 2.0);
  Network flipped = net;
  flipped.layers[1].beta = -net.layers[1].beta;
  const auto r = crisp_decision_region(net);
  const auto rf = crisp_decision_region(flipped);
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      const double x = -2 + 4.0 * (i + 0.5) / 200.0, y = -2 + 4.0 * (j + 0.5) / 200.0;
      // with the labels swapped, class 0 of the flipped net is class 1 of the original
      EXPECT_EQ(r(x, y), !rf(x, y));
    }
  }
}

TEST(CrispRegion, SoftOutputConvergesToCrisp) {
  for (std::size_t k : {2u, 4u}) {
    Network net = gate_net(k, 7);
    net.layers[0].weights *= 3.0;
    for (double beta : {50.0, 100.0, 400.0}) {
      net.layers[0].beta = beta;
      net.layers[1].beta = beta;
      double worst = 0;
      for (int i = 0; i <= 60; ++i) {
        for (int j = 0; j <= 60; ++j) {
          const double x = -2 + 4.0 * i / 60.0, y = -2 + 4.0 * j / 60.0;
          worst = std::max(worst, std::abs(soft_output(net, x, y) - crisp_output(net, x, y)));
        }
      }
      EXPECT_LE(worst, 5.0 / beta) << k << " " << beta;
    }
  }
}

TEST(Explanations, PlantedLinesReadBack) {
  Network net = gate_net(2, 4, 1.0, 1.0);
  const auto lines = default_two_lines();
  plant_lines(net, lines, 3.0);
  const GateExplanation ex = extract_line_explanations(net);
  ASSERT_EQ(ex.lines.size(), 2u);
  EXPECT_FALSE(ex.complement);
  for (std::size_t i = 0; i < 2; ++i) {
    const LineSpec got = ex.lines[i].as_line();
    // same half-plane up to a positive factor
    const double s = got.b / lines[i].b * (lines[i].sense == Sense::ge ? 1.0 : -1.0);
    EXPECT_GT(s, 0.0);
    const double sign = lines[i].sense == Sense::ge ? 1.0 : -1.0;
    EXPECT_NEAR(got.m, s * sign * lines[i].m, 1e-12);
    EXPECT_NEAR(got.c, s * sign * lines[i].c, 1e-12);
    EXPECT_FALSE(ex.lines[i].vacuous);
  }
  for (double x = -2; x <= 2; x += 0.1) {
    for (double y = -2; y <= 2; y += 0.1) EXPECT_EQ(ex.contains(x, y), in_region(lines, x, y));
  }
  EXPECT_NE(ex.text().find("region = AND("), std::string::npos);
}

TEST(Explanations, VacuousRowAndComplement) {
  Network net = gate_net(2, 4);
  net.layers[0].weights.row(1).setZero();
  net.layers[1].beta = -1.0;
  const GateExplanation ex = extract_line_explanations(net);
  EXPECT_TRUE(ex.lines[1].vacuous);
  EXPECT_FALSE(ex.lines[0].vacuous);
  EXPECT_NE(ex.lines[1].text().find("vacuous condition"), std::string::npos);
  EXPECT_TRUE(ex.complement);
  EXPECT_NE(ex.text().find("complement of AND("), std::string::npos);
  const auto j = explanation_json(ex);
  EXPECT_EQ(j["semantics"], "complement of AND");
  EXPECT_EQ(j["lines"].size(), 2u);
  EXPECT_EQ(j["lines"][1]["vacuous"], true);
}

TEST(Explanations, NegativeLayerBetaFlipsSense) {
  Network net = gate_net(2, 4);
  net.layers[0].beta = -0.3;
  for (const auto& l : extract_line_explanations(net).lines) EXPECT_EQ(l.sense, Sense::le);
}

TEST(Explanations, PositiveScalingLeavesRegionUnchanged) {
  Network net = gate_net(3, 9, 1.0, 1.0);
  const GateExplanation before = extract_line_explanations(net);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  GateExplanation scaled = before;
  for (auto& l : scaled.lines) {
    const double c = scale(rng);
    l.w_x *= c;
    l.w_y *= c;
    l.offset *= c;
  }
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      const double x = -2 + 4.0 * (i + 0.5) / 200.0, y = -2 + 4.0 * (j + 0.5) / 200.0;
      EXPECT_EQ(before.contains(x, y), scaled.contains(x, y));
    }
  }
}

TEST(Explanations, RejectsNonGateNetworks) {
  std::mt19937_64 rng(1);
  const Network mlp = make_mlp({3, 4, 2}, ActivationKind::relu(), ActivationKind::identity(), InitScheme::glorot_uniform, rng);
  EXPECT_THROW(extract_line_explanations(mlp), ShapeError);
}
