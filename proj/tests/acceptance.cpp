// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ionboost/ionboost.hpp"

using namespace ionboost;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kGlobalSeed = 42;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "NOT ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string range_text(const char* name, double v, double lo, double hi) {
  return std::string(name) + " " + fmt("%.4f", v) + " in [" + fmt("%.2f", lo) + ", " + fmt("%.2f", hi) + "]";
}

MethodSpec ada(std::size_t depth, std::size_t steps) {
  BoostConfig c;
  c.max_depth = depth;
  c.n_steps = steps;
  return MethodSpec::adaboost(c);
}

// |test error - (q + (1 - 2q) disagreement)| in combined standard errors.
double identity_gap(const IonReport& r, double q) {
  const double a = standard_error(r.test_error_hat, r.mc_samples);
  const double b = (1 - 2 * q) * standard_error(r.bayes_disagreement_hat, r.mc_samples);
  const double se = std::sqrt(a * a + b * b);
  const double gap = std::abs(r.test_error_hat - test_error_via_lemma1(q, r.bayes_disagreement_hat));
  return se > 0 ? gap / se : (gap == 0 ? 0.0 : INFINITY);
}

struct ToyRuns {
  std::vector<IonReport> nn, boost;
};

ToyRuns toy_runs() {
  const Population pop = make_population(PopulationKind::half_plane_2d, 0.1);
  ToyRuns r;
  for (std::size_t s = 0; s < 20; ++s) {
    const TrainingSet t = sample(pop, 500, derive_seed(kGlobalSeed, "toy_table1", s, "train")).set;
    const std::uint64_t mc = derive_seed(kGlobalSeed, "toy_table1", s, "mc");
    r.nn.push_back(estimate_ion(MethodSpec::one_nn(), pop, t, 100000, mc));
    r.boost.push_back(estimate_ion(ada(4, 50), pop, t, 100000, mc));
  }
  return r;
}

double mean_of(const std::vector<IonReport>& v, double IonReport::*field) {
  double s = 0;
  for (const auto& r : v) s += r.*field;
  return s / static_cast<double>(v.size());
}

Outcome criterion1(const ToyRuns& r) {
  Outcome o;
  const double ion_nn = mean_of(r.nn, &IonReport::ion_hat), ion_ada = mean_of(r.boost, &IonReport::ion_hat);
  const double err_nn = mean_of(r.nn, &IonReport::test_error_hat), err_ada = mean_of(r.boost, &IonReport::test_error_hat);
  const double tr_nn = mean_of(r.nn, &IonReport::training_error), tr_ada = mean_of(r.boost, &IonReport::training_error);
  o.require(ion_nn >= 0.04 && ion_nn <= 0.12, range_text("ION(1NN)", ion_nn, 0.04, 0.12));
  o.require(ion_ada >= 0.01 && ion_ada <= 0.08, range_text("ION(AdaBoost)", ion_ada, 0.01, 0.08));
  o.require(err_nn >= 0.13 && err_nn <= 0.21, range_text("err(1NN)", err_nn, 0.13, 0.21));
  o.require(err_ada >= 0.10 && err_ada <= 0.17, range_text("err(AdaBoost)", err_ada, 0.10, 0.17));
  o.require(tr_nn == 0.0, "train(1NN) " + fmt("%.4f", tr_nn) + " = 0");
  o.require(tr_ada == 0.0, "train(AdaBoost) " + fmt("%.4f", tr_ada) + " = 0");
  std::size_t ion_wins = 0, err_wins = 0;
  for (std::size_t s = 0; s < r.nn.size(); ++s) {
    ion_wins += r.boost[s].ion_hat < r.nn[s].ion_hat;
    err_wins += r.boost[s].test_error_hat < r.nn[s].test_error_hat;
  }
  o.require(ion_wins >= 16, "ION ordering " + std::to_string(ion_wins) + "/20 >= 16");
  o.require(err_wins >= 16, "error ordering " + std::to_string(err_wins) + "/20 >= 16");
  return o;
}

Outcome criterion2(const ToyRuns& r) {
  Outcome o;
  double worst = 0;
  std::size_t bad = 0;
  for (const auto* v : {&r.nn, &r.boost})
    for (const auto& rep : *v) {
      const double g = identity_gap(rep, 0.1);
      worst = std::max(worst, g);
      bad += g > 3.0;
    }
  o.require(bad == 0, "40 classifiers, max gap " + fmt("%.2f", worst) + " SE <= 3 (" + std::to_string(bad) + " over)");
  return o;
}

Outcome criterion3() {
  Outcome o;
  const Population pop = make_population(PopulationKind::parity_6d, 0.1);
  const std::size_t seeds = 10, steps = 250;
  std::vector<double> train(steps, 0), ion(steps, 0), err(steps, 0);
  BoostConfig cfg;
  cfg.max_depth = 5;
  cfg.n_steps = steps;
  for (std::size_t s = 0; s < seeds; ++s) {
    const TrainingSet t = sample(pop, 500, derive_seed(kGlobalSeed, "sweep_iterations", s, "train")).set;
    const auto reps = estimate_ion_staged(cfg, pop, t, 100000, derive_seed(kGlobalSeed, "sweep_iterations", s, "mc"));
    for (std::size_t m = 0; m < steps; ++m) {
      train[m] += reps[m].training_error / seeds;
      ion[m] += reps[m].ion_hat / seeds;
      err[m] += reps[m].test_error_hat / seeds;
    }
  }
  // Mean training error is zero from this stage onward.
  std::size_t settled = 0;
  for (std::size_t m = 0; m < steps; ++m)
    if (train[m] != 0.0) settled = m + 1;
  o.require(settled < 50 && train[steps - 1] == 0.0,
            "mean train error 0 for every m >= " + std::to_string(settled + 1) + ", which is <= 50");
  o.require(ion[249] < ion[19], "ION m=250 " + fmt("%.4f", ion[249]) + " < m=20 " + fmt("%.4f", ion[19]));
  o.require(err[249] < err[19], "err m=250 " + fmt("%.4f", err[249]) + " < m=20 " + fmt("%.4f", err[19]));
  return o;
}

Outcome criterion4() {
  Outcome o;
  const Population pop = make_population(PopulationKind::parity_6d, 0.1);
  const std::size_t seeds = 10;
  std::vector<double> ion(9, 0), err(9, 0);
  for (std::size_t s = 0; s < seeds; ++s) {
    const TrainingSet t = sample(pop, 500, derive_seed(kGlobalSeed, "sweep_depth", s, "train")).set;
    const std::uint64_t mc = derive_seed(kGlobalSeed, "sweep_depth", s, "mc");
    for (std::size_t d : {2u, 8u}) {
      const IonReport r = estimate_ion(ada(d, 250), pop, t, 100000, mc);
      ion[d] += r.ion_hat / seeds;
      err[d] += r.test_error_hat / seeds;
    }
  }
  o.require(ion[8] < ion[2], "ION depth 8 " + fmt("%.4f", ion[8]) + " < depth 2 " + fmt("%.4f", ion[2]));
  o.require(err[8] < err[2], "err depth 8 " + fmt("%.4f", err[8]) + " < depth 2 " + fmt("%.4f", err[2]));
  return o;
}

Outcome criterion5() {
  Outcome o;
  for (std::size_t k = 1; k <= 3; ++k) {
    Rng rng(derive_seed(kGlobalSeed, "acceptance_trees", k, "trees"));
    std::size_t exact = 0;
    for (int i = 0; i < 100; ++i) {
      const DecisionTree tree = random_tree(k + 1, k, rng, i % 2 == 1);
      const GridClassifier g = GridClassifier::from_tree(tree, Box::symmetric_unit(k + 1));
      exact += tree.depth() <= k && exact_agreement_with_xor(g, k + 1) == Rational(1, 2);
    }
    o.require(exact == 100, "k=" + std::to_string(k) + ": " + std::to_string(exact) + "/100 exactly 1/2");
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  Rng rng(derive_seed(kGlobalSeed, "acceptance_stumps", 0, "ensembles"));
  double worst = 0;
  std::size_t comono = 0;
  for (int e = 0; e < 100; ++e) {
    const std::size_t d = 2 + e % 3;
    const BoostedEnsemble ens = random_stump_ensemble(d, 20, rng);
    const StumpEnsembleForm form = decompose_stump_ensemble(ens);
    std::vector<double> x(d);
    for (int j = 0; j < 1000; ++j) {
      for (auto& v : x) v = rng.uniform_left_open(-1, 1);
      worst = std::max(worst, std::abs(form.evaluate(x) - ens.margin(x)));
    }
    comono += check_comonotonic(grid_from_stump_form(form, Box::symmetric_unit(d))).is_comonotonic;
  }
  o.require(worst <= 1e-12, "max margin error " + fmt("%.3g", worst) + " <= 1e-12");
  o.require(comono == 100, std::to_string(comono) + "/100 comonotonic");
  const std::pair<const char*, GridClassifier> rivals[] = {
      {"xor_2", GridClassifier::xor_grid(2)},
      {"ring_2d", GridClassifier::rasterize(make_population(PopulationKind::ring_2d, 0.0), 16)},
      {"diagonal_2d", GridClassifier::rasterize(make_population(PopulationKind::diagonal_2d, 0.0), 16)},
  };
  for (const auto& [name, g] : rivals) {
    const ComonotonicityVerdict v = check_comonotonic(g);
    o.require(!v.is_comonotonic && v.witness.has_value(), std::string(name) + " fails with witness");
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  const PlateauCurve c =
      stump_boost_plateau(make_xor_population(2), 1000, 1000, derive_seed(kGlobalSeed, "stump_plateau", 0, "run"));
  double lo = 1, hi = 0;
  for (double e : c.stump_test_error) lo = std::min(lo, e), hi = std::max(hi, e);
  o.require(lo >= 0.45 && hi <= 0.55,
            "stump error over m<=1000 in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "] within 0.5 +/- 0.05");
  o.require(c.contrast_test_error[49] < 0.05, "depth-2 error at m=50 " + fmt("%.4f", c.contrast_test_error[49]) + " < 0.05");
  return o;
}

double pairwise_auc(const std::vector<double>& s, const std::vector<Label>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] > 0 && y[j] < 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return wins / pairs;
}

// Exhaustive over label vectors and 3-level score patterns for n <= 6, random
// inputs (with and without ties) for 7 <= n <= 50.
std::pair<std::size_t, std::size_t> auc_oracle_mismatches() {
  std::size_t cases = 0, bad = 0;
  for (std::size_t n = 2; n <= 6; ++n) {
    std::size_t patterns = 1;
    for (std::size_t i = 0; i < n; ++i) patterns *= 3;
    for (std::size_t lab = 1; lab + 1 < (std::size_t{1} << n); ++lab)
      for (std::size_t pat = 0; pat < patterns; ++pat) {
        std::vector<double> s(n);
        std::vector<Label> y(n);
        std::size_t p = pat;
        for (std::size_t i = 0; i < n; ++i, p /= 3) {
          s[i] = static_cast<double>(p % 3);
          y[i] = (lab >> i) & 1 ? 1 : -1;
        }
        ++cases;
        bad += std::abs(auc(s, y) - pairwise_auc(s, y)) > 1e-12;
      }
  }
  Rng rng(derive_seed(kGlobalSeed, "acceptance_auc", 0, "inputs"));
  for (std::size_t n = 7; n <= 50; ++n)
    for (int trial = 0; trial < 400; ++trial) {
      std::vector<double> s(n);
      std::vector<Label> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = trial % 2 ? rng.normal() : static_cast<double>(rng.below(5));
        y[i] = rng.bernoulli(0.5) ? 1 : -1;
      }
      y[0] = 1;
      y[n - 1] = -1;
      ++cases;
      bad += std::abs(auc(s, y) - pairwise_auc(s, y)) > 1e-12;
    }
  return {cases, bad};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(IONBOOST_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// Net column of an emitted equity curve, compounded and compared to the
// emitted equity column.
double equity_recompute_error(const fs::path& csv, std::size_t& months) {
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);  // provenance comment
  std::getline(in, line);  // header
  double equity = 1.0, worst = 0.0;
  months = 0;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string month, gross, net, eq;
    std::getline(row, month, ',');
    std::getline(row, gross, ',');
    std::getline(row, net, ',');
    std::getline(row, eq, ',');
    equity *= 1.0 + std::stod(net);
    worst = std::max(worst, std::abs(equity - std::stod(eq)));
    ++months;
  }
  return months ? worst : INFINITY;
}

Outcome criterion8(const fs::path& backtest_out) {
  Outcome o;
  // Depth contrast at m=100 on five synthetic parity panels.
  std::string per_seed;
  bool all = true;
  std::string shrunk;
  for (std::size_t s = 0; s < 5; ++s) {
    const FactorPanel panel = generate_synthetic_panel(60, 200, 10, derive_seed(kGlobalSeed, "backtest", s, "panel"));
    const LabeledPanel lp = label_cross_section(preprocess(panel).panel);
    const auto [train, test] = split_by_month(lp, 40);
    const auto full = auc_grid(train, test, {1, 6}, {100}, 1.0);
    const double gain = full[1].test_auc - full[0].test_auc;
    all = all && gain >= 0.05;
    per_seed += (s ? "," : "") + fmt("%.3f", gain);
    if (s == 0) {
      const auto small = auc_grid(train, test, {1, 4, 8}, {100}, 0.1);
      shrunk = "nu=0.1 seed 0 test AUC d1/d4/d8 " + fmt("%.3f", small[0].test_auc) + "/" + fmt("%.3f", small[1].test_auc) +
               "/" + fmt("%.3f", small[2].test_auc);
    }
  }
  o.require(all, "AUC(depth 6) - AUC(depth 1) at m=100, nu=1 >= 0.05 on 5 panels [" + per_seed + "]");

  const auto [cases, bad] = auc_oracle_mismatches();
  o.require(bad == 0, "AUC = pairwise oracle on " + std::to_string(cases) + " inputs of size <= 50");

  const FactorPanel hand = [] {
    FactorPanel p;
    p.factor_names = {"a"};
    const double r[] = {0.10, 0.06, 0.02, -0.04};
    for (int i = 0; i < 4; ++i) p.rows.push_back(PanelRow{1, std::string(1, char('A' + i)), true, r[i], {0.0}});
    return p;
  }();
  StrategyConfig sc;
  sc.n_long = 2;
  sc.n_short = 2;
  sc.cost_rate = 0.0;
  const std::vector<double> scores = {4, 3, 2, 1};
  const StrategyResult free = run_strategy_scores(hand, scores, sc);
  sc.cost_rate = 0.0015;
  const StrategyResult paid = run_strategy_scores(hand, scores, sc);
  o.require(std::abs(free.gross[0] - 0.09) < 1e-15, "hand example gross " + fmt("%.6f", free.gross[0]) + " = 0.09");
  o.require(std::abs(paid.cost[0] - 0.003) < 1e-15 && std::abs(paid.net[0] - 0.087) < 1e-15,
            "entry cost " + fmt("%.6f", paid.cost[0]) + " = 0.003");

  std::size_t months = 0;
  const double eq_err = equity_recompute_error(backtest_out / "equity_curve.csv", months);
  o.require(eq_err <= 1e-12, "emitted equity curve (" + std::to_string(months) + " months) recomputed to " +
                                 fmt("%.2g", eq_err) + " <= 1e-12");
  o.detail += "; info: " + shrunk;
  return o;
}

Outcome criterion9(const fs::path& root) {
  Outcome o;
  for (auto e : kAllExperiments) {
    const std::string sub = subcommand_name(e);
    const fs::path a = root / (sub + "_w1"), b = root / (sub + "_w3"), c = root / (sub + "_w1_again");
    const int sa = run_cli(sub + " --workers 1 --out " + a.string());
    const int sb = run_cli(sub + " --workers 3 --out " + b.string());
    const int sc = run_cli(sub + " --workers 1 --out " + c.string());
    bool same = sa == 0 && sb == 0 && sc == 0;
    std::size_t files = 0;
    if (same)
      for (const auto& entry : fs::directory_iterator(a)) {
        const std::string bytes = slurp(entry.path());
        same = same && bytes == slurp(b / entry.path().filename()) && bytes == slurp(c / entry.path().filename());
        ++files;
      }
    o.require(same && files > 0, sub + " (" + std::to_string(files) + " files)");
  }
  return o;
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / ("ionboost_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(root);
  int failed = 0;
  auto report = [&](int id, const char* title, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %d (%s, %.1fs): %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
    std::fflush(stdout);
  };

  ToyRuns toy;
  report(1, "noisy half-plane ION and error table", [&] {
    toy = toy_runs();
    return criterion1(toy);
  });
  report(2, "test error from Bayes disagreement", [&] { return criterion2(toy); });
  report(3, "parity sweep over stages", criterion3);
  report(4, "parity sweep over depth", criterion4);
  report(5, "depth-k trees against XOR of order k+1", criterion5);
  report(6, "stump ensemble decomposition and comonotonicity", criterion6);
  report(7, "stump plateau on clean XOR", criterion7);
  report(9, "CLI determinism across reruns and worker counts", [&] { return criterion9(root); });
  report(8, "backtest pipeline", [&] { return criterion8(root / "backtest_w1"); });
  fs::remove_all(root);
  std::printf("%d of 9 criteria failed\n", failed);
  return failed;
}
