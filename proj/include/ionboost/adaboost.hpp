#pragma once

// AdaBoost.M1 over weighted CART trees, with optional shrinkage.
//
// Stage m fits g_m on weights w, takes err_m = sum(w * miss) / sum(w),
// alpha_m = log((1 - err_m) / err_m) with err_m clipped to [eps, 1 - eps], and
// multiplies the weight of every missed point by exp(nu * alpha_m). The margin
// is F(x) = sum_m nu * alpha_m * g_m(x) and the classifier is sign(F), with
// sign(0) = +1. nu = 1 is the textbook algorithm.
//
// Weights are renormalised to sum 1 after every update; the tree fit and the
// weighted error only depend on weight ratios.

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionboost/labels.hpp"
#include "ionboost/population.hpp"
#include "ionboost/tree.hpp"

namespace ionboost {

struct BoostConfig {
  std::size_t n_steps = 50;
  std::size_t max_depth = 1;
  double learning_rate = 1.0;
  double err_clip_epsilon = 1e-10;

  void validate() const {
    if (n_steps < 1) throw std::invalid_argument("BoostConfig: n_steps must be >= 1");
    if (max_depth < 1) throw std::invalid_argument("BoostConfig: max_depth must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
      throw std::invalid_argument("BoostConfig: learning_rate must lie in (0, 1]");
    if (!(err_clip_epsilon > 0.0 && err_clip_epsilon < 0.5))
      throw std::invalid_argument("BoostConfig: err_clip_epsilon must lie in (0, 0.5)");
  }
  bool operator==(const BoostConfig&) const = default;
};

// Log-odds of the clipped weighted error.
inline double stage_alpha(double weighted_error, double eps) {
  const double e = std::clamp(weighted_error, eps, 1.0 - eps);
  return std::log((1.0 - e) / e);
}

struct BoostStage {
  DecisionTree tree;
  double alpha = 0.0;
  double weighted_error = 0.0;  // unclipped
  bool operator==(const BoostStage&) const = default;
};

enum class StopReason { completed, perfect_stage, weak_learner_failed };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::completed: return "completed";
    case StopReason::perfect_stage: return "perfect_stage";
    case StopReason::weak_learner_failed: return "weak_learner_failed";
  }
  return "completed";
}

class BoostedEnsemble {
 public:
  BoostedEnsemble() = default;
  BoostedEnsemble(BoostConfig cfg, std::size_t dim) : config_(cfg), dim_(dim) {}

  const BoostConfig& config() const noexcept { return config_; }
  const std::vector<BoostStage>& stages() const noexcept { return stages_; }
  const std::vector<double>& train_error_curve() const noexcept { return train_error_curve_; }
  StopReason stop_reason() const noexcept { return stop_reason_; }
  std::size_t size() const noexcept { return stages_.size(); }
  std::size_t dimension() const noexcept { return dim_; }

  void add_stage(BoostStage s, double train_error) {
    if (!std::isfinite(s.alpha)) throw std::invalid_argument("BoostedEnsemble: alpha must be finite");
    if (s.tree.dimension() != dim_) throw std::invalid_argument("BoostedEnsemble: stage dimension mismatch");
    stages_.push_back(std::move(s));
    train_error_curve_.push_back(train_error);
  }
  void set_stop_reason(StopReason r) noexcept { stop_reason_ = r; }

  // Weight of stage m in the margin: nu * alpha_m.
  double stage_weight(std::size_t m) const { return config_.learning_rate * stages_[m].alpha; }

  double margin(std::span<const double> x) const {
    check_dim(x);
    double f = 0.0;
    for (std::size_t m = 0; m < stages_.size(); ++m) f += stage_weight(m) * stages_[m].tree.predict(x);
    return f;
  }

  Label predict(std::span<const double> x) const { return sign_label(margin(x)); }

  // Entry m is sign of the (m+1)-stage prefix margin.
  std::vector<Label> staged_labels(std::span<const double> x) const {
    check_dim(x);
    std::vector<Label> out;
    out.reserve(stages_.size());
    double f = 0.0;
    for (std::size_t m = 0; m < stages_.size(); ++m) {
      f += stage_weight(m) * stages_[m].tree.predict(x);
      out.push_back(sign_label(f));
    }
    return out;
  }

  double total_stage_weight() const {
    double s = 0.0;
    for (std::size_t m = 0; m < stages_.size(); ++m) s += stage_weight(m);
    return s;
  }

  // Reporting-only squashing of the margin into (0, 1).
  double pseudo_probability(std::span<const double> x) const {
    const double total = total_stage_weight();
    if (!(total > 0.0)) return 0.5;
    return 1.0 / (1.0 + std::exp(-2.0 * margin(x) / total));
  }

  bool operator==(const BoostedEnsemble&) const = default;

  void write_text(std::ostream& os) const {
    os << "ensemble " << dim_ << ' ' << config_.n_steps << ' ' << config_.max_depth << ' '
       << format_exact(config_.learning_rate) << ' ' << format_exact(config_.err_clip_epsilon) << ' ' << stages_.size()
       << ' ' << to_string(stop_reason_) << '\n';
    for (std::size_t m = 0; m < stages_.size(); ++m) {
      os << "stage " << format_exact(stages_[m].alpha) << ' ' << format_exact(stages_[m].weighted_error) << ' '
         << format_exact(train_error_curve_[m]) << '\n';
      stages_[m].tree.write_text(os);
    }
  }

  std::string to_text() const {
    std::ostringstream os;
    write_text(os);
    return os.str();
  }

  static BoostedEnsemble read_text(std::istream& is) {
    std::string word, lr, eps, stop;
    BoostedEnsemble e;
    std::size_t count = 0;
    if (!(is >> word >> e.dim_ >> e.config_.n_steps >> e.config_.max_depth >> lr >> eps >> count >> stop) ||
        word != "ensemble")
      throw DataError("ensemble text: bad header");
    e.config_.learning_rate = std::stod(lr);
    e.config_.err_clip_epsilon = std::stod(eps);
    if (stop == "completed") e.stop_reason_ = StopReason::completed;
    else if (stop == "perfect_stage") e.stop_reason_ = StopReason::perfect_stage;
    else if (stop == "weak_learner_failed") e.stop_reason_ = StopReason::weak_learner_failed;
    else throw DataError("ensemble text: unknown stop reason '" + stop + "'");
    for (std::size_t m = 0; m < count; ++m) {
      std::string alpha, err, curve;
      if (!(is >> word >> alpha >> err >> curve) || word != "stage") throw DataError("ensemble text: bad stage line");
      BoostStage s;
      s.alpha = std::stod(alpha);
      s.weighted_error = std::stod(err);
      s.tree = DecisionTree::read_text(is);
      e.add_stage(std::move(s), std::stod(curve));
    }
    return e;
  }

 private:
  void check_dim(std::span<const double> x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("BoostedEnsemble: expected dimension " + std::to_string(dim_) + ", got " +
                                  std::to_string(x.size()));
  }

  BoostConfig config_;
  std::size_t dim_ = 0;
  std::vector<BoostStage> stages_;
  std::vector<double> train_error_curve_;
  StopReason stop_reason_ = StopReason::completed;
};

// Observer hook for inspecting each accepted stage:
// observer(stage_index, weights_before, stage, weights_after).
struct NoStageObserver {
  void operator()(std::size_t, std::span<const double>, const BoostStage&, std::span<const double>) const noexcept {}
};

template <typename Observer = NoStageObserver>
BoostedEnsemble fit_adaboost(const TrainingSet& t, const BoostConfig& cfg, Observer&& observer = {}) {
  cfg.validate();
  if (t.empty()) throw std::invalid_argument("fit_adaboost: empty training set");
  const std::size_t n = t.size();
  const SortedFeatures sorted(t);
  BoostedEnsemble ens(cfg, t.dimension());

  WeightVector w(n, 1.0 / static_cast<double>(n));
  WeightVector next(n);
  std::vector<Label> pred(n);
  std::vector<double> margin(n, 0.0);

  for (std::size_t m = 0; m < cfg.n_steps; ++m) {
    DecisionTree g = fit_tree(t, sorted, w, cfg.max_depth);
    double wsum = 0.0, wmiss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = g.predict(t.x(i));
      wsum += w[i];
      if (pred[i] != t.y(i)) wmiss += w[i];
    }
    const double err = wmiss / wsum;
    if (err >= 0.5 && m > 0) {
      ens.set_stop_reason(StopReason::weak_learner_failed);
      break;
    }
    BoostStage stage{std::move(g), stage_alpha(err, cfg.err_clip_epsilon), err};

    const double step = cfg.learning_rate * stage.alpha;
    std::size_t train_miss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += step * pred[i];
      if (sign_label(margin[i]) != t.y(i)) ++train_miss;
    }

    const double boost = std::exp(step);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = pred[i] != t.y(i) ? w[i] * boost : w[i];
      total += next[i];
    }
    for (auto& v : next) v /= total;

    observer(m, std::span<const double>(w), stage, std::span<const double>(next));
    ens.add_stage(std::move(stage), static_cast<double>(train_miss) / static_cast<double>(n));
    if (err == 0.0) {
      ens.set_stop_reason(StopReason::perfect_stage);
      break;
    }
    w.swap(next);
  }
  return ens;
}

inline double predict_margin(const BoostedEnsemble& ens, std::span<const double> x) { return ens.margin(x); }
inline Label predict_label(const BoostedEnsemble& ens, std::span<const double> x) { return ens.predict(x); }
inline std::vector<Label> staged_labels(const BoostedEnsemble& ens, std::span<const double> x) {
  return ens.staged_labels(x);
}

}  // namespace ionboost
