#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <functional>

#include "ionboost/counterexample.hpp"

using namespace ionboost;

namespace {

DecisionTree xor2_tree() {
  const auto leaf = [](Label l) { return DecisionTree::leaf(2, l); };
  return DecisionTree::split(0, 0.0, DecisionTree::split(1, 0.0, leaf(-1), leaf(1)),
                             DecisionTree::split(1, 0.0, leaf(1), leaf(-1)));
}

DecisionTree stump(std::size_t dim, std::size_t axis, double thr, Label l, Label r) {
  return DecisionTree::split(axis, thr, DecisionTree::leaf(dim, l), DecisionTree::leaf(dim, r));
}

// Agreement by brute-force midpoint sampling of a fine uniform grid whose cuts
// include every cut of g and 0; exact because both rules are constant on each
// cell of that grid when the cuts are dyadic.
double dyadic_agreement_oracle(const DecisionTree& tree, std::size_t k) {
  const int per_axis = 64;
  std::vector<double> x(k);
  std::size_t agree = 0, total = 0;
  std::vector<int> idx(k, 0);
  while (true) {
    for (std::size_t a = 0; a < k; ++a) x[a] = -1.0 + (idx[a] + 0.5) * 2.0 / per_axis;
    agree += tree.predict(x) == xor_label(x);
    ++total;
    std::size_t a = 0;
    while (a < k && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == k) break;
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

}  // namespace

TEST(XorLabel, Examples) {
  const double a[] = {1, -1}, b[] = {0.5, 0.5}, c[] = {1, 1, 1};
  EXPECT_EQ(xor_label(2, a), 1);
  EXPECT_EQ(xor_label(2, b), -1);
  EXPECT_EQ(xor_label(3, c), 1);
  EXPECT_THROW(xor_label(1, std::span<const double>(a, 1)), std::invalid_argument);
  EXPECT_THROW(xor_label(3, a), std::invalid_argument);
}

TEST(ExactAgreement, ExplicitTreeIsXor) {
  const GridClassifier g = GridClassifier::from_tree(xor2_tree(), Box::symmetric_unit(2));
  EXPECT_EQ(exact_agreement_with_xor(g, 2), Rational(1));
}

TEST(ExactAgreement, StumpsAreHalf) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double thr = i < 4 ? std::array<double, 4>{0.0, 0.5, -1.0, 1.0}[i] : rng.uniform_left_open(-1, 1);
    const Label l = rng.bernoulli(0.5) ? 1 : -1;
    const GridClassifier g =
        GridClassifier::from_tree(stump(2, i % 2, thr, l, rng.bernoulli(0.5) ? l : -l), Box::symmetric_unit(2));
    EXPECT_EQ(exact_agreement_with_xor(g, 2), Rational(1, 2)) << "thr " << thr;
  }
}

TEST(ExactAgreement, DepthKTreesAgainstXorKPlusOne) {
  for (std::size_t k = 1; k <= 3; ++k) {
    Rng rng(derive_seed(42, "tree_xor_check", k, "trees"));
    for (int i = 0; i < 100; ++i) {
      const DecisionTree tree = random_tree(k + 1, k, rng, i % 2 == 1);
      ASSERT_LE(tree.depth(), k);
      const GridClassifier g = GridClassifier::from_tree(tree, Box::symmetric_unit(k + 1));
      EXPECT_EQ(exact_agreement_with_xor(g, k + 1), Rational(1, 2)) << "k=" << k << " tree " << i;
      EXPECT_NEAR(exact_agreement_with_xor<double>(g, k + 1), 0.5, 1e-12);
    }
  }
}

TEST(ExactAgreement, MatchesDyadicOracle) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    // Dyadic thresholds on a 1/32 lattice so the oracle grid is exact.
    const std::size_t k = 2 + i % 2;
    std::function<DecisionTree(std::size_t)> grow = [&](std::size_t depth) {
      if (depth == 0 || rng.uniform01() < 0.2) return DecisionTree::leaf(k, rng.bernoulli(0.5) ? 1 : -1);
      const double thr = -1.0 + static_cast<double>(1 + rng.below(63)) / 32.0;
      return DecisionTree::split(rng.below(k), thr, grow(depth - 1), grow(depth - 1));
    };
    const DecisionTree tree = grow(k + 1);
    const GridClassifier g = GridClassifier::from_tree(tree, Box::symmetric_unit(k));
    EXPECT_DOUBLE_EQ(exact_agreement_with_xor<double>(g, k), dyadic_agreement_oracle(tree, k)) << i;
  }
}

TEST(ExactAgreement, AgreementPlusDisagreementIsOne) {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 2 + i % 3;
    const GridClassifier g = GridClassifier::from_tree(random_tree(k, 4, rng, i % 2 == 0), Box::symmetric_unit(k));
    const auto m = xor_agreement_measures(g, k);
    EXPECT_EQ(m.agreement + m.disagreement, Rational(1));
  }
}

TEST(ExactAgreement, DimensionMismatch) {
  const GridClassifier g = GridClassifier::xor_grid(2);
  EXPECT_THROW(exact_agreement_with_xor(g, 3), std::invalid_argument);
  EXPECT_THROW(exact_agreement_with_xor(g, 1), std::invalid_argument);
}

TEST(GridClassifier, LosslessConversion) {
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    const std::size_t d = 2 + i % 3;
    const DecisionTree tree = random_tree(d, 5, rng, i % 2 == 0);
    const GridClassifier g = GridClassifier::from_tree(tree, Box::symmetric_unit(d));
    const BoostedEnsemble ens = random_stump_ensemble(d, 30, rng);
    const GridClassifier h = GridClassifier::from_ensemble(ens, Box::symmetric_unit(d));
    std::vector<double> x(d);
    for (int j = 0; j < 10000; ++j) {
      for (auto& v : x) v = rng.uniform_left_open(-1, 1);
      ASSERT_EQ(g.predict(x), tree.predict(x));
      ASSERT_EQ(h.predict(x), ens.predict(x));
    }
    // Exact cut positions are the riskiest inputs.
    for (std::size_t a = 0; a < d; ++a)
      for (double c : g.cuts(a)) {
        for (auto& v : x) v = rng.uniform_left_open(-1, 1);
        x[a] = c;
        ASSERT_EQ(g.predict(x), tree.predict(x));
      }
  }
}

TEST(GridClassifier, CellCountAndValidation) {
  const GridClassifier g(Box::symmetric_unit(2), {{-0.5, 0.5}, {0.0}}, {1, 1, 1, -1, -1, -1});
  EXPECT_EQ(g.cell_count(), 6u);
  EXPECT_THROW(GridClassifier(Box::symmetric_unit(2), {{0.5, -0.5}, {}}, {1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(GridClassifier(Box::symmetric_unit(2), {{1.0}, {}}, {1, 1}), std::invalid_argument);
  EXPECT_THROW(GridClassifier(Box::symmetric_unit(2), {{0.0}, {}}, {1}), std::invalid_argument);
}

TEST(Decompose, SingleStump) {
  BoostedEnsemble e(BoostConfig{}, 2);
  e.add_stage(BoostStage{stump(2, 0, 0.2, -1, 1), 1.0, 0.1}, 0.0);
  const StumpEnsembleForm f = decompose_stump_ensemble(e);
  EXPECT_DOUBLE_EQ(f.offset, 0.0);
  ASSERT_EQ(f.axes[0].size(), 1u);
  EXPECT_DOUBLE_EQ(f.axes[0][0].threshold, 0.2);
  EXPECT_DOUBLE_EQ(f.axes[0][0].coefficient, -1.0);
  EXPECT_DOUBLE_EQ(std::abs(f.step_jump(0, 0)), 2.0);
  EXPECT_TRUE(f.axes[1].empty());
}

TEST(Decompose, MergesSharedThresholdsAndFoldsLeaves) {
  BoostConfig cfg;
  cfg.learning_rate = 0.5;
  BoostedEnsemble e(cfg, 2);
  e.add_stage(BoostStage{stump(2, 1, 0.3, 1, -1), 1.0, 0.1}, 0.0);
  e.add_stage(BoostStage{stump(2, 1, 0.3, 1, -1), 2.0, 0.1}, 0.0);
  e.add_stage(BoostStage{stump(2, 1, -0.3, 1, 1), 1.0, 0.1}, 0.0);
  e.add_stage(BoostStage{DecisionTree::leaf(2, -1), 4.0, 0.1}, 0.0);
  const StumpEnsembleForm f = decompose_stump_ensemble(e);
  EXPECT_TRUE(f.axes[0].empty());
  ASSERT_EQ(f.axes[1].size(), 2u);
  EXPECT_DOUBLE_EQ(f.axes[1][0].threshold, -0.3);
  EXPECT_DOUBLE_EQ(f.axes[1][0].coefficient, 0.0);
  EXPECT_DOUBLE_EQ(f.axes[1][1].coefficient, 1.5);
  EXPECT_DOUBLE_EQ(f.offset, 0.5 - 2.0);
}

TEST(Decompose, RandomEnsemblesReproduceMargin) {
  Rng rng(derive_seed(42, "stump_form_check", 0, "ensembles"));
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 2 + i % 3;
    const BoostedEnsemble ens = random_stump_ensemble(d, 20, rng);
    const StumpEnsembleForm f = decompose_stump_ensemble(ens);
    for (const auto& terms : f.axes)
      for (std::size_t j = 1; j < terms.size(); ++j) ASSERT_LT(terms[j - 1].threshold, terms[j].threshold);
    std::vector<double> x(d);
    for (int j = 0; j < 1000; ++j) {
      for (auto& v : x) v = rng.uniform_left_open(-1, 1);
      ASSERT_NEAR(f.evaluate(x), ens.margin(x), 1e-12);
    }
  }
}

TEST(Decompose, FittedStumpEnsemble) {
  const Population p = make_population(PopulationKind::ring_2d, 0.1);
  BoostConfig cfg;
  cfg.n_steps = 60;
  const BoostedEnsemble ens = fit_adaboost(sample(p, 400, 2).set, cfg);
  const StumpEnsembleForm f = decompose_stump_ensemble(ens);
  Rng rng(4);
  double x[2];
  for (int j = 0; j < 1000; ++j) {
    x[0] = rng.uniform_left_open(-1, 1);
    x[1] = rng.uniform_left_open(-1, 1);
    ASSERT_NEAR(f.evaluate(x), ens.margin(x), 1e-12);
  }
}

TEST(Decompose, DeeperStageRejected) {
  BoostedEnsemble e(BoostConfig{}, 2);
  e.add_stage(BoostStage{xor2_tree(), 1.0, 0.1}, 0.0);
  EXPECT_THROW(decompose_stump_ensemble(e), std::invalid_argument);
}

TEST(Comonotonic, XorFailsWithWitnessOnFirstAxis) {
  const ComonotonicityVerdict v = check_comonotonic(GridClassifier::xor_grid(2));
  ASSERT_FALSE(v.is_comonotonic);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(v.witness->axis, 0u);
  EXPECT_EQ(v.witness->boundary, 0.0);
  EXPECT_FALSE(describe(*v.witness).empty());
  EXPECT_FALSE(check_comonotonic(GridClassifier::xor_grid(3)).is_comonotonic);
}

TEST(Comonotonic, ConstantAndStumpEnsembles) {
  const GridClassifier constant(Box::symmetric_unit(2), {{-0.2, 0.4}, {0.1}}, std::vector<Label>(6, -1));
  const ComonotonicityVerdict c = check_comonotonic(constant);
  EXPECT_TRUE(c.is_comonotonic);
  EXPECT_FALSE(c.witness.has_value());
  Rng rng(derive_seed(42, "stump_form_check", 1, "ensembles"));
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 2 + i % 3;
    const BoostedEnsemble ens = random_stump_ensemble(d, 20, rng);
    const GridClassifier g = grid_from_stump_form(decompose_stump_ensemble(ens), Box::symmetric_unit(d));
    EXPECT_TRUE(check_comonotonic(g).is_comonotonic) << i;
    EXPECT_EQ(g, GridClassifier::from_ensemble(ens, Box::symmetric_unit(d)));
  }
}

TEST(Comonotonic, RingAndDiagonalFail) {
  for (PopulationKind k : {PopulationKind::ring_2d, PopulationKind::diagonal_2d}) {
    const ComonotonicityVerdict v = check_comonotonic(GridClassifier::rasterize(make_population(k, 0.0), 16));
    EXPECT_FALSE(v.is_comonotonic);
    EXPECT_TRUE(v.witness.has_value());
  }
}

// A comonotonic stump form that matches XOR_2 on three of the four quadrants.
TEST(Comonotonic, StumpFormReachesThreeQuarters) {
  StumpEnsembleForm f;
  f.offset = -1.0;
  f.axes = {{{0.0, -1.0}}, {{0.0, 1.0}}};
  const GridClassifier g = grid_from_stump_form(f, Box::symmetric_unit(2));
  EXPECT_TRUE(check_comonotonic(g).is_comonotonic);
  EXPECT_EQ(exact_agreement_with_xor(g, 2), Rational(3, 4));
}

TEST(Plateau, StumpsStayNearHalfOnCleanXor) {
  const PlateauCurve c = stump_boost_plateau(make_xor_population(2), 1000, 1000, derive_seed(42, "stump_plateau", 0, "run"));
  ASSERT_EQ(c.stump_test_error.size(), 1000u);
  for (std::size_t m = 0; m < c.stump_test_error.size(); ++m)
    ASSERT_NEAR(c.stump_test_error[m], 0.5, 0.05) << "m=" << m + 1;
}

TEST(Plateau, DepthTwoLearnsCleanXor) {
  const PlateauCurve c = stump_boost_plateau(make_xor_population(2), 1000, 50, derive_seed(42, "stump_plateau", 0, "run"));
  EXPECT_LT(c.contrast_test_error.back(), 0.05);
}

TEST(Plateau, RingStumpsAboveDepthFour) {
  PlateauOptions opts;
  opts.contrast_depth = 4;
  opts.mc_samples = 50000;
  const PlateauCurve c = stump_boost_plateau(make_population(PopulationKind::ring_2d, 0.0), 1000, 500, 9, opts);
  EXPECT_GE(c.stump_test_error.back() - c.contrast_test_error.back(), 0.1);
}

TEST(Plateau, Errors) {
  EXPECT_THROW(stump_boost_plateau(make_xor_population(2), 100, 0, 1), std::invalid_argument);
}
