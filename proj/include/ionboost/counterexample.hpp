#pragma once

// Exact machinery for the limits of shallow trees and stump ensembles.
//
// Every axis-aligned piecewise-constant classifier used here (a tree, the sign
// of a stump ensemble, a rasterised Bayes rule) converts to a GridClassifier:
// per-axis sorted cuts and one label per cell. Cells are products of half-open
// intervals (c_j, c_{j+1}], matching the "x <= threshold goes left" routing of
// trees, so conversion loses nothing, boundaries included.
//
// On a grid, agreement with k-XOR is a finite sum of cell volumes, computed
// exactly in rationals (cpp_rational holds any double exactly) or in
// compensated floating point. Comonotonicity reduces to comparing the two
// slabs adjacent to every cut, since labels are constant between cuts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ionboost/adaboost.hpp"
#include "ionboost/ion.hpp"
#include "ionboost/labels.hpp"
#include "ionboost/population.hpp"
#include "ionboost/rng.hpp"
#include "ionboost/tree.hpp"

namespace ionboost {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr std::size_t kMaxGridDimension = 6;
inline constexpr std::size_t kMaxGridCells = std::size_t{1} << 24;

inline Label xor_label(std::size_t k, std::span<const double> x) {
  if (k < 2) throw std::invalid_argument("xor_label: k must be >= 2");
  if (x.size() != k) throw std::invalid_argument("xor_label: expected " + std::to_string(k) + " coordinates");
  return xor_label(x);
}

class GridClassifier {
 public:
  GridClassifier(Box support, std::vector<std::vector<double>> cuts, std::vector<Label> labels)
      : GridClassifier(std::move(support), std::move(cuts)) {
    if (labels.size() != cell_count_) throw std::invalid_argument("GridClassifier: label count must equal cell count");
    for (Label l : labels)
      if (!is_label(l)) throw std::invalid_argument("GridClassifier: labels must be -1 or +1");
    labels_ = std::move(labels);
  }

  enum class Representative { upper_corner, midpoint };

  // Labels each cell with f at one representative point. The upper corner
  // belongs to the cell under the half-open convention, which makes
  // tabulating a tree or stump ensemble exact; midpoints suit rules with other
  // boundary conventions (XOR treats 0 specially).
  template <typename F>
  static GridClassifier tabulate(const Box& support, std::vector<std::vector<double>> cuts, F&& f,
                                 Representative rep = Representative::upper_corner) {
    for (std::size_t a = 0; a < cuts.size() && a < support.dimension(); ++a) {
      auto& c = cuts[a];
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
      std::erase_if(c, [&](double v) { return !(v > support.lo[a] && v < support.hi[a]); });
    }
    GridClassifier g(support, std::move(cuts));
    std::vector<double> x(g.dimension());
    std::vector<std::size_t> idx(g.dimension(), 0);
    for (std::size_t cell = 0; cell < g.cell_count_; ++cell) {
      g.unflatten(cell, idx);
      for (std::size_t a = 0; a < g.dimension(); ++a)
        x[a] = rep == Representative::upper_corner ? g.upper(a, idx[a])
                                                   : 0.5 * (g.lower(a, idx[a]) + g.upper(a, idx[a]));
      g.labels_[cell] = f(std::span<const double>(x));
    }
    return g;
  }

  static GridClassifier from_tree(const DecisionTree& tree, const Box& support) {
    check_support(tree.dimension(), support);
    std::vector<std::vector<double>> cuts(tree.dimension());
    for (const auto& n : tree.nodes())
      if (!n.is_leaf()) cuts[n.axis].push_back(n.threshold);
    return tabulate(support, std::move(cuts), [&](std::span<const double> x) { return tree.predict(x); });
  }

  static GridClassifier from_ensemble(const BoostedEnsemble& ens, const Box& support) {
    check_support(ens.dimension(), support);
    std::vector<std::vector<double>> cuts(ens.dimension());
    for (const auto& s : ens.stages())
      for (const auto& n : s.tree.nodes())
        if (!n.is_leaf()) cuts[n.axis].push_back(n.threshold);
    return tabulate(support, std::move(cuts), [&](std::span<const double> x) { return ens.predict(x); });
  }

  // Bayes rule sampled at cell midpoints of a uniform grid; exact only when
  // the rule is itself constant on those cells.
  static GridClassifier rasterize(const Population& pop, std::size_t cells_per_axis) {
    if (cells_per_axis < 1) throw std::invalid_argument("rasterize: need at least one cell per axis");
    const Box box = pop.support();
    std::vector<std::vector<double>> cuts(pop.dimension());
    for (std::size_t a = 0; a < pop.dimension(); ++a) {
      const double step = (box.hi[a] - box.lo[a]) / static_cast<double>(cells_per_axis);
      for (std::size_t j = 1; j < cells_per_axis; ++j) cuts[a].push_back(box.lo[a] + step * static_cast<double>(j));
    }
    return tabulate(box, std::move(cuts), [&](std::span<const double> x) { return pop.bayes_label(x); },
                    Representative::midpoint);
  }

  // XOR_k on (-1, 1]^k: one cut at 0 per axis, labels by orthant.
  static GridClassifier xor_grid(std::size_t k) {
    if (k < 2) throw std::invalid_argument("xor_grid: k must be >= 2");
    return tabulate(Box::symmetric_unit(k), std::vector<std::vector<double>>(k, {0.0}),
                    [](std::span<const double> x) { return xor_label(x); }, Representative::midpoint);
  }

  std::size_t dimension() const noexcept { return support_.dimension(); }
  const Box& support() const noexcept { return support_; }
  const std::vector<double>& cuts(std::size_t axis) const { return cuts_[axis]; }
  std::size_t cells_along(std::size_t axis) const { return cuts_[axis].size() + 1; }
  std::size_t cell_count() const noexcept { return cell_count_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  double lower(std::size_t axis, std::size_t j) const { return j == 0 ? support_.lo[axis] : cuts_[axis][j - 1]; }
  double upper(std::size_t axis, std::size_t j) const {
    return j == cuts_[axis].size() ? support_.hi[axis] : cuts_[axis][j];
  }

  std::size_t flatten(std::span<const std::size_t> idx) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) f += idx[a] * strides_[a];
    return f;
  }
  void unflatten(std::size_t flat, std::span<std::size_t> idx) const {
    for (std::size_t a = 0; a < idx.size(); ++a) {
      idx[a] = flat / strides_[a];
      flat %= strides_[a];
    }
  }

  Label cell_label(std::span<const std::size_t> idx) const { return labels_[flatten(idx)]; }

  // Cell index along `axis` holding coordinate v: the first j with v <= c_j.
  std::size_t locate(std::size_t axis, double v) const {
    const auto& c = cuts_[axis];
    return static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), v) - c.begin());
  }

  Label predict(std::span<const double> x) const {
    if (x.size() != dimension()) throw std::invalid_argument("GridClassifier::predict: dimension mismatch");
    std::size_t f = 0;
    for (std::size_t a = 0; a < x.size(); ++a) f += locate(a, x[a]) * strides_[a];
    return labels_[f];
  }

  // Same classifier on a finer grid (extra cuts merged in per axis).
  GridClassifier refined(const std::vector<std::vector<double>>& extra) const {
    std::vector<std::vector<double>> cuts = cuts_;
    for (std::size_t a = 0; a < cuts.size() && a < extra.size(); ++a) {
      for (double v : extra[a])
        if (v > support_.lo[a] && v < support_.hi[a]) cuts[a].push_back(v);
      std::sort(cuts[a].begin(), cuts[a].end());
      cuts[a].erase(std::unique(cuts[a].begin(), cuts[a].end()), cuts[a].end());
    }
    // Refined interval (r_j, r_{j+1}] lies inside the original cell holding r_{j+1}.
    std::vector<std::vector<std::size_t>> parent(dimension());
    for (std::size_t a = 0; a < dimension(); ++a) {
      for (std::size_t j = 0; j <= cuts[a].size(); ++j) {
        const double up = j == cuts[a].size() ? support_.hi[a] : cuts[a][j];
        parent[a].push_back(j == cuts[a].size() ? cuts_[a].size() : locate(a, up));
      }
    }
    GridClassifier g(support_, std::move(cuts));
    std::vector<std::size_t> idx(dimension()), orig(dimension());
    for (std::size_t cell = 0; cell < g.cell_count_; ++cell) {
      g.unflatten(cell, idx);
      for (std::size_t a = 0; a < dimension(); ++a) orig[a] = parent[a][idx[a]];
      g.labels_[cell] = cell_label(orig);
    }
    return g;
  }

  bool operator==(const GridClassifier& o) const {
    return support_.lo == o.support_.lo && support_.hi == o.support_.hi && cuts_ == o.cuts_ && labels_ == o.labels_;
  }

 private:
  // Validates the cuts; every cell starts labelled +1.
  GridClassifier(Box support, std::vector<std::vector<double>> cuts)
      : support_(std::move(support)), cuts_(std::move(cuts)) {
    const std::size_t d = support_.dimension();
    if (d == 0 || d > kMaxGridDimension)
      throw std::invalid_argument("GridClassifier: dimension must be in [1, " + std::to_string(kMaxGridDimension) + "]");
    if (cuts_.size() != d) throw std::invalid_argument("GridClassifier: need one cut list per axis");
    for (std::size_t a = 0; a < d; ++a) {
      const auto& c = cuts_[a];
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (!(c[j] > support_.lo[a] && c[j] < support_.hi[a]))
          throw std::invalid_argument("GridClassifier: cuts must be interior to the support");
        if (j > 0 && !(c[j - 1] < c[j])) throw std::invalid_argument("GridClassifier: cuts must be strictly increasing");
      }
    }
    compute_strides();
    labels_.assign(cell_count_, 1);
  }

  static void check_support(std::size_t dim, const Box& support) {
    if (support.dimension() != dim) throw std::invalid_argument("GridClassifier: support dimension mismatch");
  }

  static std::size_t cell_product_of(const std::vector<std::vector<double>>& cuts, std::size_t d) {
    std::size_t n = 1;
    for (std::size_t a = 0; a < d && a < cuts.size(); ++a) {
      const std::size_t along = cuts[a].size() + 1;
      if (n > kMaxGridCells / along) throw std::invalid_argument("GridClassifier: too many cells");
      n *= along;
    }
    return n;
  }

  void compute_strides() {
    cell_count_ = cell_product_of(cuts_, dimension());
    strides_.assign(dimension(), 1);
    for (std::size_t a = dimension(); a-- > 1;) strides_[a - 1] = strides_[a] * cells_along(a);
  }

  Box support_;
  std::vector<std::vector<double>> cuts_;
  std::vector<Label> labels_;
  std::vector<std::size_t> strides_;
  std::size_t cell_count_ = 0;
};

namespace detail {

// Neumaier-compensated running sum for floating point; plain sum otherwise.
template <typename Scalar>
class Accumulator {
 public:
  void add(const Scalar& v) {
    if constexpr (std::is_floating_point_v<Scalar>) {
      const Scalar t = sum_ + v;
      if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
      else comp_ += (v - t) + sum_;
      sum_ = t;
    } else {
      sum_ += v;
    }
  }
  Scalar value() const {
    if constexpr (std::is_floating_point_v<Scalar>) return sum_ + comp_;
    else return sum_;
  }

 private:
  Scalar sum_{0};
  Scalar comp_{0};
};

}  // namespace detail

// Measures of agreement and disagreement between a grid and XOR_k, both as
// fractions of the support volume.
template <typename Scalar>
struct XorAgreement {
  Scalar agreement{0};
  Scalar disagreement{0};
};

template <typename Scalar = Rational>
XorAgreement<Scalar> xor_agreement_measures(const GridClassifier& g, std::size_t k) {
  if (k < 2) throw std::invalid_argument("exact_agreement_with_xor: k must be >= 2");
  if (g.dimension() != k)
    throw std::invalid_argument("exact_agreement_with_xor: grid dimension " + std::to_string(g.dimension()) +
                                " does not match k = " + std::to_string(k));
  const GridClassifier fine = g.refined(std::vector<std::vector<double>>(k, {0.0}));

  std::vector<std::vector<Scalar>> lengths(k);
  std::vector<std::vector<double>> orthant(k);
  Scalar total{1};
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t j = 0; j < fine.cells_along(a); ++j) {
      const double lo = fine.lower(a, j), hi = fine.upper(a, j);
      lengths[a].push_back(Scalar(hi) - Scalar(lo));
      // 0 is a cut, so every refined interval lies on one side of it.
      orthant[a].push_back(hi <= 0.0 ? -1.0 : 1.0);
    }
    total *= Scalar(fine.support().hi[a]) - Scalar(fine.support().lo[a]);
  }

  detail::Accumulator<Scalar> agree, disagree;
  std::vector<std::size_t> idx(k);
  std::vector<double> rep(k);
  for (std::size_t cell = 0; cell < fine.cell_count(); ++cell) {
    fine.unflatten(cell, idx);
    Scalar vol{1};
    for (std::size_t a = 0; a < k; ++a) {
      vol *= lengths[a][idx[a]];
      rep[a] = orthant[a][idx[a]];
    }
    if (fine.labels()[cell] == xor_label(rep)) agree.add(vol);
    else disagree.add(vol);
  }
  return {agree.value() / total, disagree.value() / total};
}

// P_X{g(X) = XOR_k(X)} for X uniform on the grid's support box.
template <typename Scalar = Rational>
Scalar exact_agreement_with_xor(const GridClassifier& g, std::size_t k) {
  return xor_agreement_measures<Scalar>(g, k).agreement;
}

// L + sum over axes a, terms j of beta_{a,j} * s(x_a <= t_{a,j}), s(true) = +1,
// s(false) = -1. A stump with leaf values (l, r) and stage weight w contributes
// w (l + r) / 2 to L and w (l - r) / 2 as the coefficient of its threshold.
struct StumpTerm {
  double threshold = 0.0;
  double coefficient = 0.0;
  bool operator==(const StumpTerm&) const = default;
};

struct StumpEnsembleForm {
  double offset = 0.0;
  std::vector<std::vector<StumpTerm>> axes;  // sorted by threshold within each axis

  std::size_t dimension() const noexcept { return axes.size(); }

  double evaluate(std::span<const double> x) const {
    if (x.size() != axes.size()) throw std::invalid_argument("StumpEnsembleForm::evaluate: dimension mismatch");
    double f = offset;
    for (std::size_t a = 0; a < axes.size(); ++a)
      for (const auto& t : axes[a]) f += x[a] <= t.threshold ? t.coefficient : -t.coefficient;
    return f;
  }

  Label predict(std::span<const double> x) const { return sign_label(evaluate(x)); }

  // Jump of the form when x_a crosses threshold j from below: -2 beta.
  double step_jump(std::size_t axis, std::size_t j) const { return -2.0 * axes[axis][j].coefficient; }
};

inline StumpEnsembleForm decompose_stump_ensemble(const BoostedEnsemble& ens) {
  StumpEnsembleForm form;
  form.axes.resize(ens.dimension());
  for (std::size_t m = 0; m < ens.size(); ++m) {
    const DecisionTree& tree = ens.stages()[m].tree;
    const double w = ens.stage_weight(m);
    const TreeNode& root = tree.root();
    if (root.is_leaf()) {
      form.offset += w * root.label;
      continue;
    }
    const TreeNode& l = tree.nodes()[root.left];
    const TreeNode& r = tree.nodes()[root.right];
    if (!l.is_leaf() || !r.is_leaf())
      throw std::invalid_argument("decompose_stump_ensemble: stage " + std::to_string(m + 1) + " has depth " +
                                  std::to_string(tree.depth()) + " (stumps only)");
    form.offset += w * (l.label + r.label) / 2.0;
    form.axes[root.axis].push_back({root.threshold, w * (l.label - r.label) / 2.0});
  }
  for (auto& terms : form.axes) {
    std::stable_sort(terms.begin(), terms.end(),
                     [](const StumpTerm& a, const StumpTerm& b) { return a.threshold < b.threshold; });
    std::vector<StumpTerm> merged;
    for (const auto& t : terms) {
      if (!merged.empty() && merged.back().threshold == t.threshold) merged.back().coefficient += t.coefficient;
      else merged.push_back(t);
    }
    terms = std::move(merged);
  }
  return form;
}

inline GridClassifier grid_from_stump_form(const StumpEnsembleForm& form, const Box& support) {
  if (support.dimension() != form.dimension()) throw std::invalid_argument("grid_from_stump_form: dimension mismatch");
  std::vector<std::vector<double>> cuts(form.dimension());
  for (std::size_t a = 0; a < form.dimension(); ++a)
    for (const auto& t : form.axes[a]) cuts[a].push_back(t.threshold);
  return GridClassifier::tabulate(support, std::move(cuts), [&](std::span<const double> x) { return form.predict(x); });
}

struct ComonotonicityWitness {
  std::size_t axis = 0;
  double boundary = 0.0;
  std::vector<std::size_t> rising_cell;   // left cell of a -1 -> +1 crossing
  std::vector<std::size_t> falling_cell;  // left cell of a +1 -> -1 crossing
};

struct ComonotonicityVerdict {
  bool is_comonotonic = true;
  std::optional<ComonotonicityWitness> witness;
};

inline std::string describe(const ComonotonicityWitness& w) {
  auto cell = [&](const std::vector<std::size_t>& idx, bool right) {
    std::ostringstream os;
    os << '(';
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (a) os << ',';
      os << idx[a] + ((right && a == w.axis) ? 1 : 0);
    }
    os << ')';
    return os.str();
  };
  std::ostringstream os;
  os << "axis " << w.axis << " boundary " << format_exact(w.boundary) << ": cell " << cell(w.rising_cell, false)
     << " -> " << cell(w.rising_cell, true) << " goes -1 to +1; cell " << cell(w.falling_cell, false) << " -> "
     << cell(w.falling_cell, true) << " goes +1 to -1";
  return os.str();
}

inline ComonotonicityVerdict check_comonotonic(const GridClassifier& g) {
  const std::size_t d = g.dimension();
  std::vector<std::size_t> idx(d);
  for (std::size_t axis = 0; axis < d; ++axis) {
    for (std::size_t j = 0; j + 1 < g.cells_along(axis); ++j) {
      std::optional<std::vector<std::size_t>> rising, falling;
      for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
        g.unflatten(cell, idx);
        if (idx[axis] != j) continue;
        const Label a = g.labels()[cell];
        idx[axis] = j + 1;
        const Label b = g.cell_label(idx);
        idx[axis] = j;
        // f(a) - f(b) < 0 is a rise across the boundary.
        if (a < b && !rising) rising = idx;
        if (a > b && !falling) falling = idx;
        if (rising && falling) {
          return {false, ComonotonicityWitness{axis, g.cuts(axis)[j], *rising, *falling}};
        }
      }
    }
  }
  return {true, std::nullopt};
}

// Random tree of depth <= max_depth on `dim` axes. With `adversarial`, split
// values come from a small set hitting 0, the support edges and tiny offsets,
// and axes are reused along paths.
inline DecisionTree random_tree(std::size_t dim, std::size_t max_depth, Rng& rng, bool adversarial = false) {
  static constexpr double kAwkward[] = {0.0, 0.5, -0.5, 1.0, -1.0, 1e-300, -1e-300, 0.25, 0x1p-52, -0x1p-52};
  std::function<DecisionTree(std::size_t, std::size_t)> grow = [&](std::size_t remaining, std::size_t prev_axis) {
    const bool stop = remaining == 0 || rng.uniform01() < 0.15;
    if (stop) return DecisionTree::leaf(dim, rng.bernoulli(0.5) ? 1 : -1);
    std::size_t axis = static_cast<std::size_t>(rng.below(dim));
    double thr = rng.uniform_left_open(-1.0, 1.0);
    if (adversarial) {
      if (prev_axis < dim && rng.bernoulli(0.5)) axis = prev_axis;
      if (rng.bernoulli(0.7)) thr = kAwkward[rng.below(std::size(kAwkward))];
    }
    DecisionTree left = grow(remaining - 1, axis);
    DecisionTree right = grow(remaining - 1, axis);
    return DecisionTree::split(axis, thr, left, right);
  };
  return grow(max_depth, dim);
}

// Random ensemble of `stumps` depth-1 stages with stage weights in (0.05, 2].
inline BoostedEnsemble random_stump_ensemble(std::size_t dim, std::size_t stumps, Rng& rng) {
  BoostConfig cfg;
  cfg.n_steps = stumps;
  cfg.max_depth = 1;
  BoostedEnsemble ens(cfg, dim);
  for (std::size_t m = 0; m < stumps; ++m) {
    const std::size_t axis = static_cast<std::size_t>(rng.below(dim));
    const double thr = rng.uniform_left_open(-1.0, 1.0);
    const Label l = rng.bernoulli(0.5) ? 1 : -1;
    const Label r = rng.bernoulli(0.8) ? -l : l;
    BoostStage s{DecisionTree::split(axis, thr, DecisionTree::leaf(dim, l), DecisionTree::leaf(dim, r)),
                 rng.uniform_left_open(0.05, 2.0), 0.0};
    ens.add_stage(std::move(s), 0.0);
  }
  return ens;
}

// Monte Carlo test error of every prefix sign(F_m), m = 1..steps, on one
// stream. Prefixes past the ensemble's length repeat the full ensemble.
inline std::vector<double> staged_test_errors(const BoostedEnsemble& ens, const Population& pop, std::size_t steps,
                                              std::size_t mc_samples, std::uint64_t seed, const McOptions& opts = {}) {
  if (ens.dimension() != pop.dimension()) throw std::invalid_argument("staged_test_errors: dimension mismatch");
  if (mc_samples == 0) throw std::invalid_argument("staged_test_errors: mc_samples must be positive");
  const std::size_t d = pop.dimension();
  const std::size_t chunks = chunk_count(mc_samples);
  std::vector<std::vector<std::uint64_t>> miss(chunks, std::vector<std::uint64_t>(steps, 0));
  parallel_chunks(chunks, opts.workers, [&](std::size_t c) {
    std::vector<double> xs;
    std::vector<Label> bayes, ys;
    const std::size_t count = draw_chunk(pop, seed, c, mc_samples, xs, bayes, ys);
    std::vector<double> f(count, 0.0);
    for (std::size_t m = 0; m < steps; ++m) {
      if (m < ens.size()) {
        const double w = ens.stage_weight(m);
        const auto& tree = ens.stages()[m].tree;
        for (std::size_t i = 0; i < count; ++i) f[i] += w * tree.predict({xs.data() + i * d, d});
      }
      std::uint64_t k = 0;
      for (std::size_t i = 0; i < count; ++i) k += sign_label(f[i]) != ys[i];
      miss[c][m] = k;
    }
  });
  std::vector<double> out(steps, 0.0);
  for (std::size_t m = 0; m < steps; ++m) {
    std::uint64_t k = 0;
    for (std::size_t c = 0; c < chunks; ++c) k += miss[c][m];
    out[m] = static_cast<double>(k) / static_cast<double>(mc_samples);
  }
  return out;
}

struct PlateauOptions {
  std::size_t contrast_depth = 2;
  std::size_t mc_samples = kDefaultMonteCarloSamples;
  double learning_rate = 1.0;
  McOptions mc{};
};

struct PlateauCurve {
  std::string population;
  std::size_t contrast_depth = 2;
  std::vector<double> stump_test_error;     // entry m-1: m stages
  std::vector<double> contrast_test_error;  // same, depth = contrast_depth
};

inline PlateauCurve stump_boost_plateau(const Population& pop, std::size_t n, std::size_t n_steps_max,
                                        std::uint64_t seed, const PlateauOptions& opts = {}) {
  if (n_steps_max < 1) throw std::invalid_argument("stump_boost_plateau: n_steps_max must be >= 1");
  const LabelledSample data = sample(pop, n, mix_seed(seed, {fnv1a64("plateau-train")}));
  const std::uint64_t mc_seed = mix_seed(seed, {fnv1a64("plateau-mc")});
  BoostConfig cfg;
  cfg.n_steps = n_steps_max;
  cfg.learning_rate = opts.learning_rate;
  cfg.max_depth = 1;
  const BoostedEnsemble stumps = fit_adaboost(data.set, cfg);
  cfg.max_depth = opts.contrast_depth;
  const BoostedEnsemble deep = fit_adaboost(data.set, cfg);
  PlateauCurve out;
  out.population = pop.name();
  out.contrast_depth = opts.contrast_depth;
  out.stump_test_error = staged_test_errors(stumps, pop, n_steps_max, opts.mc_samples, mc_seed, opts.mc);
  out.contrast_test_error = staged_test_errors(deep, pop, n_steps_max, opts.mc_samples, mc_seed, opts.mc);
  return out;
}

}  // namespace ionboost
