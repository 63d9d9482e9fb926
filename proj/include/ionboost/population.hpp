#pragma once

// Synthetic populations with analytically known Bayes classifiers.
//
// X is uniform on the box (-1, 1]^d. The label is the Bayes rule flipped
// independently of X with probability q, so q is the Bayes error and the
// noise indicator is independent of X.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionboost/labels.hpp"
#include "ionboost/rng.hpp"

namespace ionboost {

enum class PopulationKind { half_plane_2d, parity_6d, xor_k, ring_2d, diagonal_2d };

// Axis-aligned box with half-open coordinates (lo, hi].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dimension() const noexcept { return lo.size(); }
  bool contains(std::span<const double> x) const noexcept {
    if (x.size() != lo.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!(x[i] > lo[i] && x[i] <= hi[i])) return false;
    return true;
  }
  static Box symmetric_unit(std::size_t d) { return Box{std::vector<double>(d, -1.0), std::vector<double>(d, 1.0)}; }
};

// Ring: +1 iff kRingInner <= |x|_2 <= kRingOuter.
inline constexpr double kRingInner = 0.4;
inline constexpr double kRingOuter = 0.8;
// Diagonal band: +1 iff |x1 - x2| <= kDiagonalHalfWidth.
inline constexpr double kDiagonalHalfWidth = 0.5;

class Population {
 public:
  Population(PopulationKind kind, double q, std::size_t xor_order = 0) : kind_(kind), q_(q), xor_order_(xor_order) {
    if (!(q >= 0.0 && q < 0.5))
      throw std::invalid_argument("Population: Bayes error q must lie in [0, 0.5), got " + std::to_string(q));
    switch (kind) {
      case PopulationKind::half_plane_2d:
      case PopulationKind::ring_2d:
      case PopulationKind::diagonal_2d:
        dim_ = 2;
        break;
      case PopulationKind::parity_6d:
        dim_ = 6;
        break;
      case PopulationKind::xor_k:
        if (xor_order < 2) throw std::invalid_argument("Population: xor_k needs k >= 2, got " + std::to_string(xor_order));
        dim_ = xor_order;
        break;
    }
  }

  PopulationKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dim_; }
  double bayes_error() const noexcept { return q_; }
  std::size_t xor_order() const noexcept { return xor_order_; }
  Box support() const { return Box::symmetric_unit(dim_); }

  Label bayes_label(std::span<const double> x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("bayes_label: expected dimension " + std::to_string(dim_) + ", got " +
                                  std::to_string(x.size()));
    switch (kind_) {
      case PopulationKind::half_plane_2d:
        return sign_label(x[0]);
      case PopulationKind::parity_6d:
        return sign_label(x[0] * x[1] * x[2]);
      case PopulationKind::xor_k:
        return xor_label(x);
      case PopulationKind::ring_2d: {
        const double r = std::hypot(x[0], x[1]);
        return (r >= kRingInner && r <= kRingOuter) ? 1 : -1;
      }
      case PopulationKind::diagonal_2d:
        return std::abs(x[0] - x[1]) <= kDiagonalHalfWidth ? 1 : -1;
    }
    return 1;
  }

  std::string name() const {
    switch (kind_) {
      case PopulationKind::half_plane_2d: return "half_plane_2d";
      case PopulationKind::parity_6d: return "parity_6d";
      case PopulationKind::xor_k: return "xor_" + std::to_string(xor_order_);
      case PopulationKind::ring_2d: return "ring_2d";
      case PopulationKind::diagonal_2d: return "diagonal_2d";
    }
    return "unknown";
  }

  // One X draw, uniform on the support, written into `out`.
  void draw_input(Rng& rng, std::span<double> out) const {
    for (auto& v : out) v = rng.uniform_left_open(-1.0, 1.0);
  }

 private:
  PopulationKind kind_;
  double q_;
  std::size_t xor_order_;
  std::size_t dim_ = 0;
};

// `k` is only read for xor_k.
inline Population make_population(PopulationKind kind, double q, std::size_t k = 2) {
  return Population(kind, q, kind == PopulationKind::xor_k ? k : 0);
}

// XOR populations default to a zero Bayes error.
inline Population make_xor_population(std::size_t k, double q = 0.0) { return Population(PopulationKind::xor_k, q, k); }

// Parses the names produced by Population::name() ("xor_3" etc.).
inline Population population_from_name(const std::string& name, double q) {
  if (name == "half_plane_2d") return Population(PopulationKind::half_plane_2d, q);
  if (name == "parity_6d") return Population(PopulationKind::parity_6d, q);
  if (name == "ring_2d") return Population(PopulationKind::ring_2d, q);
  if (name == "diagonal_2d") return Population(PopulationKind::diagonal_2d, q);
  if (name.rfind("xor_", 0) == 0) {
    std::size_t k = 0;
    try {
      k = std::stoul(name.substr(4));
    } catch (const std::exception&) {
      throw std::invalid_argument("unknown population '" + name + "'");
    }
    return Population(PopulationKind::xor_k, q, k);
  }
  throw std::invalid_argument("unknown population '" + name +
                              "' (expected half_plane_2d, parity_6d, ring_2d, diagonal_2d or xor_<k>)");
}

// n labelled points in row-major storage.
class TrainingSet {
 public:
  TrainingSet() = default;
  explicit TrainingSet(std::size_t dim) : dim_(dim) {}
  TrainingSet(std::size_t dim, std::vector<double> xs, std::vector<Label> ys)
      : dim_(dim), xs_(std::move(xs)), ys_(std::move(ys)) {
    if (dim_ == 0) throw std::invalid_argument("TrainingSet: dimension must be positive");
    if (xs_.size() != dim_ * ys_.size()) throw std::invalid_argument("TrainingSet: coordinate count does not match labels");
    for (Label y : ys_)
      if (!is_label(y)) throw std::invalid_argument("TrainingSet: labels must be -1 or +1");
  }

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ys_.size(); }
  bool empty() const noexcept { return ys_.empty(); }

  std::span<const double> x(std::size_t i) const { return {xs_.data() + i * dim_, dim_}; }
  double x(std::size_t i, std::size_t axis) const { return xs_[i * dim_ + axis]; }
  Label y(std::size_t i) const { return ys_[i]; }
  const std::vector<Label>& labels() const noexcept { return ys_; }
  const std::vector<double>& coordinates() const noexcept { return xs_; }

  void push_back(std::span<const double> x, Label y) {
    if (x.size() != dim_) throw std::invalid_argument("TrainingSet::push_back: dimension mismatch");
    if (!is_label(y)) throw std::invalid_argument("TrainingSet::push_back: label must be -1 or +1");
    xs_.insert(xs_.end(), x.begin(), x.end());
    ys_.push_back(y);
  }

  // Same inputs, replaced outputs.
  TrainingSet with_labels(std::vector<Label> ys) const { return TrainingSet(dim_, xs_, std::move(ys)); }

  bool operator==(const TrainingSet&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> xs_;
  std::vector<Label> ys_;
};

// flags[i] is true iff y_i differs from the Bayes rule at x_i.
struct NoiseAnnotation {
  std::vector<bool> flags;

  std::size_t noise_count() const noexcept {
    std::size_t c = 0;
    for (bool f : flags) c += f ? 1 : 0;
    return c;
  }
  bool operator==(const NoiseAnnotation&) const = default;
};

struct LabelledSample {
  TrainingSet set;
  NoiseAnnotation noise;
};

inline LabelledSample sample(const Population& pop, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample: n must be >= 1");
  const std::size_t d = pop.dimension();
  Rng rng(seed);
  std::vector<double> xs(n * d);
  std::vector<Label> ys(n);
  NoiseAnnotation noise;
  noise.flags.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> xi(xs.data() + i * d, d);
    pop.draw_input(rng, xi);
    const bool flip = rng.bernoulli(pop.bayes_error());
    const Label b = pop.bayes_label(xi);
    ys[i] = flip ? -b : b;
    noise.flags[i] = flip;
  }
  return {TrainingSet(d, std::move(xs), std::move(ys)), std::move(noise)};
}

inline NoiseAnnotation annotate(const Population& pop, const TrainingSet& t) {
  NoiseAnnotation a;
  a.flags.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) a.flags[i] = t.y(i) != pop.bayes_label(t.x(i));
  return a;
}

// Replaces every label with the Bayes rule's output at the same input.
inline TrainingSet purify(const Population& pop, const TrainingSet& t) {
  if (t.dimension() != pop.dimension()) throw std::invalid_argument("purify: dimension mismatch");
  std::vector<Label> theta(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) theta[i] = pop.bayes_label(t.x(i));
  return t.with_labels(std::move(theta));
}

// CSV: x_1..x_d,y,is_noise with a header row.
inline void write_training_set_csv(std::ostream& os, const TrainingSet& t, const NoiseAnnotation& noise) {
  if (noise.flags.size() != t.size()) throw std::invalid_argument("write_training_set_csv: annotation size mismatch");
  for (std::size_t j = 0; j < t.dimension(); ++j) os << "x_" << (j + 1) << ',';
  os << "y,is_noise\n";
  std::ostringstream cell;
  cell << std::setprecision(17);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t.dimension(); ++j) {
      cell.str("");
      cell << t.x(i, j);
      os << cell.str() << ',';
    }
    os << t.y(i) << ',' << (noise.flags[i] ? 1 : 0) << '\n';
  }
}

inline LabelledSample read_training_set_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("training set CSV: missing header");
  std::size_t columns = 1;
  for (char c : line) columns += c == ',' ? 1 : 0;
  if (columns < 3) throw DataError("training set CSV: expected x_1..x_d,y,is_noise");
  const std::size_t d = columns - 2;
  LabelledSample out{TrainingSet(d), {}};
  std::vector<double> x(d);
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns) throw DataError("training set CSV: row " + std::to_string(row) + " has wrong column count");
    try {
      for (std::size_t j = 0; j < d; ++j) x[j] = std::stod(cells[j]);
      out.set.push_back(x, std::stoi(cells[d]));
      out.noise.flags.push_back(std::stoi(cells[d + 1]) != 0);
    } catch (const std::exception& e) {
      throw DataError("training set CSV: row " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ionboost
