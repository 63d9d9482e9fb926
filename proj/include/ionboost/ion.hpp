#pragma once

// Influence of noise (ION) and related Monte Carlo estimates.
//
// For a training set T and a method M, ION(M, T) = P_X{f_T(X) != f_Tp(X)},
// where T_p is T with every label replaced by the Bayes rule. All estimates in
// one report are computed on one shared stream of (X, Y) draws, generated in
// fixed-size chunks with per-chunk seeds so results do not depend on how many
// workers evaluate the chunks.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ionboost/adaboost.hpp"
#include "ionboost/labels.hpp"
#include "ionboost/nearest_neighbor.hpp"
#include "ionboost/parallel.hpp"
#include "ionboost/population.hpp"
#include "ionboost/rng.hpp"

namespace ionboost {

struct MethodSpec {
  enum class Kind { adaboost, one_nn };

  Kind kind = Kind::one_nn;
  BoostConfig boost{};

  static MethodSpec one_nn() { return MethodSpec{Kind::one_nn, {}}; }
  static MethodSpec adaboost(const BoostConfig& cfg) {
    cfg.validate();
    return MethodSpec{Kind::adaboost, cfg};
  }

  std::string name() const {
    if (kind == Kind::one_nn) return "1nn";
    char buf[96];
    std::snprintf(buf, sizeof buf, "adaboost(depth=%zu;steps=%zu;nu=%g)", boost.max_depth, boost.n_steps,
                  boost.learning_rate);
    return buf;
  }
  bool operator==(const MethodSpec&) const = default;
};

class Classifier {
 public:
  explicit Classifier(NearestNeighborModel m) : model_(std::move(m)) {}
  explicit Classifier(BoostedEnsemble e) : model_(std::move(e)) {}

  Label predict(std::span<const double> x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, model_);
  }
  const BoostedEnsemble* ensemble() const noexcept { return std::get_if<BoostedEnsemble>(&model_); }

 private:
  std::variant<NearestNeighborModel, BoostedEnsemble> model_;
};

inline Classifier train(const MethodSpec& method, const TrainingSet& t) {
  if (method.kind == MethodSpec::Kind::one_nn) return Classifier(fit_1nn(t));
  return Classifier(fit_adaboost(t, method.boost));
}

template <typename Predictor>
double training_error(const Predictor& f, const TrainingSet& t) {
  std::size_t miss = 0;
  for (std::size_t i = 0; i < t.size(); ++i) miss += f.predict(t.x(i)) != t.y(i) ? 1 : 0;
  return t.empty() ? 0.0 : static_cast<double>(miss) / static_cast<double>(t.size());
}

struct McOptions {
  std::size_t workers = 1;
};

inline constexpr std::size_t kMonteCarloChunk = 8192;
inline constexpr std::size_t kDefaultMonteCarloSamples = 100000;

inline double half_width_95(double p, std::size_t samples) {
  return samples == 0 ? 0.0 : 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
}

inline double standard_error(double p, std::size_t samples) {
  return samples == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
}

struct IonReport {
  std::string method;
  std::string population;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double ion_hat = 0.0;                          // P_X{f_T != f_Tp}
  double test_error_hat = 0.0;                   // P{f_T(X) != Y}
  double bayes_disagreement_hat = 0.0;           // P_X{f_T != f^B}
  double purified_bayes_disagreement_hat = 0.0;  // P_X{f_Tp != f^B}
  double training_error = 0.0;
  std::size_t mc_samples = 0;
  double half_width_95 = 0.0;  // of ion_hat
  double test_error_half_width_95 = 0.0;
  double bayes_disagreement_half_width_95 = 0.0;

  bool operator==(const IonReport&) const = default;
};

inline const char* kIonCsvHeader =
    "method,pop,n,seed,ion_hat,test_error_hat,bayes_disagreement_hat,training_error,mc_samples,half_width_95";

inline std::string format_prob(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void write_ion_csv_row(std::ostream& os, const IonReport& r) {
  os << r.method << ',' << r.population << ',' << r.n << ',' << r.seed << ',' << format_prob(r.ion_hat) << ','
     << format_prob(r.test_error_hat) << ',' << format_prob(r.bayes_disagreement_hat) << ','
     << format_prob(r.training_error) << ',' << r.mc_samples << ',' << format_prob(r.half_width_95) << '\n';
}

// Raw disagreement counts over one Monte Carlo stream.
struct McCounts {
  std::uint64_t samples = 0;
  std::uint64_t ion = 0;          // f_T != f_Tp
  std::uint64_t test_error = 0;   // f_T != Y
  std::uint64_t bayes = 0;        // f_T != f^B
  std::uint64_t purified = 0;     // f_Tp != f^B

  McCounts& operator+=(const McCounts& o) {
    samples += o.samples;
    ion += o.ion;
    test_error += o.test_error;
    bayes += o.bayes;
    purified += o.purified;
    return *this;
  }
};

// Draws chunk `c` of the Monte Carlo stream: inputs (row-major) and labels Y.
inline std::size_t draw_chunk(const Population& pop, std::uint64_t seed, std::size_t c, std::size_t total,
                              std::vector<double>& xs, std::vector<Label>& bayes, std::vector<Label>& ys) {
  const std::size_t begin = c * kMonteCarloChunk;
  const std::size_t count = std::min(kMonteCarloChunk, total - begin);
  const std::size_t d = pop.dimension();
  xs.resize(count * d);
  bayes.resize(count);
  ys.resize(count);
  Rng rng(mix_seed(seed, {0x4D43ULL, c}));
  for (std::size_t i = 0; i < count; ++i) {
    std::span<double> x(xs.data() + i * d, d);
    pop.draw_input(rng, x);
    const bool flip = rng.bernoulli(pop.bayes_error());
    bayes[i] = pop.bayes_label(x);
    ys[i] = flip ? -bayes[i] : bayes[i];
  }
  return count;
}

inline std::size_t chunk_count(std::size_t samples) { return (samples + kMonteCarloChunk - 1) / kMonteCarloChunk; }

template <typename F, typename G>
McCounts monte_carlo_counts(const F& f_noisy, const G& f_purified, const Population& pop, std::size_t samples,
                            std::uint64_t seed, const McOptions& opts = {}) {
  const std::size_t chunks = chunk_count(samples);
  std::vector<McCounts> per_chunk(chunks);
  parallel_chunks(chunks, opts.workers, [&](std::size_t c) {
    std::vector<double> xs;
    std::vector<Label> bayes, ys;
    const std::size_t count = draw_chunk(pop, seed, c, samples, xs, bayes, ys);
    const std::size_t d = pop.dimension();
    McCounts k;
    k.samples = count;
    for (std::size_t i = 0; i < count; ++i) {
      std::span<const double> x(xs.data() + i * d, d);
      const Label a = f_noisy.predict(x);
      const Label b = f_purified.predict(x);
      k.ion += a != b;
      k.test_error += a != ys[i];
      k.bayes += a != bayes[i];
      k.purified += b != bayes[i];
    }
    per_chunk[c] = k;
  });
  McCounts total;
  for (const auto& k : per_chunk) total += k;
  return total;
}

inline IonReport make_report(const McCounts& k, std::string method, const Population& pop, std::size_t n,
                             std::uint64_t seed, double train_err) {
  IonReport r;
  r.method = std::move(method);
  r.population = pop.name();
  r.n = n;
  r.seed = seed;
  const double s = static_cast<double>(k.samples);
  r.ion_hat = static_cast<double>(k.ion) / s;
  r.test_error_hat = static_cast<double>(k.test_error) / s;
  r.bayes_disagreement_hat = static_cast<double>(k.bayes) / s;
  r.purified_bayes_disagreement_hat = static_cast<double>(k.purified) / s;
  r.training_error = train_err;
  r.mc_samples = k.samples;
  r.half_width_95 = half_width_95(r.ion_hat, k.samples);
  r.test_error_half_width_95 = half_width_95(r.test_error_hat, k.samples);
  r.bayes_disagreement_half_width_95 = half_width_95(r.bayes_disagreement_hat, k.samples);
  return r;
}

inline void check_ion_inputs(const Population& pop, const TrainingSet& t, std::size_t mc_samples) {
  if (t.dimension() != pop.dimension())
    throw std::invalid_argument("estimate_ion: training set dimension " + std::to_string(t.dimension()) +
                                " does not match population dimension " + std::to_string(pop.dimension()));
  if (mc_samples == 0) throw std::invalid_argument("estimate_ion: mc_samples must be positive");
  if (t.empty()) throw std::invalid_argument("estimate_ion: empty training set");
}

inline IonReport estimate_ion(const MethodSpec& method, const Population& pop, const TrainingSet& t,
                              std::size_t mc_samples, std::uint64_t seed, const McOptions& opts = {}) {
  check_ion_inputs(pop, t, mc_samples);
  const Classifier f_noisy = train(method, t);
  const Classifier f_purified = train(method, purify(pop, t));
  const McCounts k = monte_carlo_counts(f_noisy, f_purified, pop, mc_samples, seed, opts);
  return make_report(k, method.name(), pop, t.size(), seed, training_error(f_noisy, t));
}

// Test error of the Bayes classifier itself, on the same stream layout.
inline double bayes_test_error(const Population& pop, std::size_t mc_samples, std::uint64_t seed,
                               const McOptions& opts = {}) {
  struct BayesRule {
    const Population& pop;
    Label predict(std::span<const double> x) const { return pop.bayes_label(x); }
  } f{pop};
  const McCounts k = monte_carlo_counts(f, f, pop, mc_samples, seed, opts);
  return static_cast<double>(k.test_error) / static_cast<double>(k.samples);
}

// Per-prefix reports for AdaBoost: entry m-1 describes the m-stage classifiers
// f_T^(m) and f_Tp^(m). Prefixes past an early stop repeat the full ensemble.
inline std::vector<IonReport> estimate_ion_staged(const BoostConfig& cfg, const Population& pop, const TrainingSet& t,
                                                  std::size_t mc_samples, std::uint64_t seed,
                                                  const McOptions& opts = {}) {
  check_ion_inputs(pop, t, mc_samples);
  const BoostedEnsemble noisy = fit_adaboost(t, cfg);
  const BoostedEnsemble purified = fit_adaboost(purify(pop, t), cfg);
  const std::size_t steps = cfg.n_steps;
  const std::size_t d = pop.dimension();
  const std::size_t chunks = chunk_count(mc_samples);

  std::vector<std::vector<McCounts>> per_chunk(chunks, std::vector<McCounts>(steps));
  parallel_chunks(chunks, opts.workers, [&](std::size_t c) {
    std::vector<double> xs;
    std::vector<Label> bayes, ys;
    const std::size_t count = draw_chunk(pop, seed, c, mc_samples, xs, bayes, ys);
    std::vector<double> fa(count, 0.0), fb(count, 0.0);
    auto& out = per_chunk[c];
    for (std::size_t m = 0; m < steps; ++m) {
      if (m < noisy.size()) {
        const double wgt = noisy.stage_weight(m);
        const auto& tree = noisy.stages()[m].tree;
        for (std::size_t i = 0; i < count; ++i) fa[i] += wgt * tree.predict({xs.data() + i * d, d});
      }
      if (m < purified.size()) {
        const double wgt = purified.stage_weight(m);
        const auto& tree = purified.stages()[m].tree;
        for (std::size_t i = 0; i < count; ++i) fb[i] += wgt * tree.predict({xs.data() + i * d, d});
      }
      McCounts k;
      k.samples = count;
      for (std::size_t i = 0; i < count; ++i) {
        const Label a = sign_label(fa[i]);
        const Label b = sign_label(fb[i]);
        k.ion += a != b;
        k.test_error += a != ys[i];
        k.bayes += a != bayes[i];
        k.purified += b != bayes[i];
      }
      out[m] = k;
    }
  });

  const auto& curve = noisy.train_error_curve();
  std::vector<IonReport> reports;
  reports.reserve(steps);
  for (std::size_t m = 0; m < steps; ++m) {
    McCounts total;
    for (std::size_t c = 0; c < chunks; ++c) total += per_chunk[c][m];
    BoostConfig prefix = cfg;
    prefix.n_steps = m + 1;
    const double train_err = curve.empty() ? 0.0 : curve[std::min(m, curve.size() - 1)];
    reports.push_back(make_report(total, MethodSpec::adaboost(prefix).name(), pop, t.size(), seed, train_err));
  }
  return reports;
}

// Test error predicted from the Bayes error and the disagreement with f^B:
// P{f != Y} = q + (1 - 2q) P_X{f != f^B}, valid when the noise is independent of X.
inline double test_error_via_lemma1(double q, double bayes_disagreement) {
  if (!(q >= 0.0 && q < 0.5)) throw std::invalid_argument("test_error_via_lemma1: q must lie in [0, 0.5)");
  if (!(bayes_disagreement >= 0.0 && bayes_disagreement <= 1.0))
    throw std::invalid_argument("test_error_via_lemma1: disagreement must lie in [0, 1]");
  return q + (1.0 - 2.0 * q) * bayes_disagreement;
}

struct MethodComparison {
  IonReport a;
  IonReport b;
  bool a_lower_ion = false;
  bool b_lower_ion = false;
  bool a_lower_test_error = false;
  bool b_lower_test_error = false;
  // Orderings whose gap exceeds the sum of the two 95% half-widths.
  bool ion_separated = false;
  bool test_error_separated = false;
};

inline MethodComparison compare_methods(const MethodSpec& a, const MethodSpec& b, const Population& pop,
                                        const TrainingSet& t, std::size_t mc_samples, std::uint64_t seed,
                                        const McOptions& opts = {}) {
  MethodComparison c;
  c.a = estimate_ion(a, pop, t, mc_samples, seed, opts);
  c.b = estimate_ion(b, pop, t, mc_samples, seed, opts);
  c.a_lower_ion = c.a.ion_hat < c.b.ion_hat;
  c.b_lower_ion = c.b.ion_hat < c.a.ion_hat;
  c.a_lower_test_error = c.a.test_error_hat < c.b.test_error_hat;
  c.b_lower_test_error = c.b.test_error_hat < c.a.test_error_hat;
  c.ion_separated = std::abs(c.a.ion_hat - c.b.ion_hat) > c.a.half_width_95 + c.b.half_width_95;
  c.test_error_separated = std::abs(c.a.test_error_hat - c.b.test_error_hat) >
                           c.a.test_error_half_width_95 + c.b.test_error_half_width_95;
  return c;
}

}  // namespace ionboost
