#pragma once

// Experiment runners behind the CLI subcommands. Every output file starts with
// a '#' line carrying the config hash; rows are written in (seed, parameter)
// order after all work is done, so bytes do not depend on the worker count.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ionboost/adaboost.hpp"
#include "ionboost/backtest.hpp"
#include "ionboost/config.hpp"
#include "ionboost/counterexample.hpp"
#include "ionboost/ion.hpp"
#include "ionboost/parallel.hpp"
#include "ionboost/population.hpp"
#include "ionboost/rng.hpp"

namespace ionboost {

struct RunResult {
  std::vector<std::string> files;  // paths written, in order
};

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class OutputFile {
 public:
  OutputFile(const ExperimentConfig& cfg, const std::string& name, RunResult& result) {
    const std::filesystem::path dir(cfg.text("out"));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    path_ = (dir / name).string();
    os_.open(path_, std::ios::binary);
    if (!os_) throw DataError("cannot write output file '" + path_ + "'");
    os_ << "# ionboost " << subcommand_name(cfg.experiment()) << " config_hash=" << cfg.hash_hex()
        << " seed=" << cfg.global_seed() << '\n';
    result.files.push_back(path_);
  }
  std::ostream& stream() { return os_; }
  template <typename T>
  OutputFile& operator<<(const T& v) {
    os_ << v;
    return *this;
  }

 private:
  std::string path_;
  std::ofstream os_;
};

inline BoostConfig boost_config(std::size_t depth, std::size_t steps, double lr) {
  BoostConfig c;
  c.max_depth = depth;
  c.n_steps = steps;
  c.learning_rate = lr;
  c.validate();
  return c;
}

inline Population config_population(const ExperimentConfig& cfg) {
  try {
    return population_from_name(cfg.text("population"), cfg.real("q"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid population settings: ") + e.what());
  }
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace detail

// Noisy-label training error, Monte Carlo test error and ION for the Bayes
// rule, 1NN and AdaBoost, averaged over seeds.
inline RunResult run_toy(const ExperimentConfig& cfg, std::ostream& log) {
  const Population pop = detail::config_population(cfg);
  const std::size_t seeds = cfg.n_seeds(), n = cfg.count("n"), mc = cfg.count("mc_samples");
  const MethodSpec ada = MethodSpec::adaboost(
      detail::boost_config(cfg.count("max_depth"), cfg.count("n_steps"), cfg.real("learning_rate")));
  const MethodSpec nn = MethodSpec::one_nn();
  const std::string exp = experiment_name(cfg.experiment());

  struct SeedRun {
    double bayes_train = 0.0, bayes_test = 0.0;
    IonReport nn, ada;
  };
  std::vector<SeedRun> runs(seeds);
  parallel_chunks(seeds, cfg.workers(), [&](std::size_t s) {
    const LabelledSample data = sample(pop, n, derive_seed(cfg.global_seed(), exp, s, "train"));
    const std::uint64_t mc_seed = derive_seed(cfg.global_seed(), exp, s, "mc");
    runs[s].bayes_train = static_cast<double>(data.noise.noise_count()) / static_cast<double>(n);
    runs[s].bayes_test = bayes_test_error(pop, mc, mc_seed);
    runs[s].nn = estimate_ion(nn, pop, data.set, mc, mc_seed);
    runs[s].ada = estimate_ion(ada, pop, data.set, mc, mc_seed);
  });

  RunResult result;
  auto avg = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(get(r));
    return detail::mean(v);
  };
  {
    detail::OutputFile f(cfg, "table1.csv", result);
    f << "method,ion,training_error,test_error,seeds\n";
    f << "bayes,," << format_prob(avg([](const SeedRun& r) { return r.bayes_train; })) << ','
      << format_prob(avg([](const SeedRun& r) { return r.bayes_test; })) << ',' << seeds << '\n';
    for (int which = 0; which < 2; ++which) {
      auto rep = [&](const SeedRun& r) -> const IonReport& { return which == 0 ? r.nn : r.ada; };
      f << (which == 0 ? nn.name() : ada.name()) << ',' << format_prob(avg([&](const SeedRun& r) { return rep(r).ion_hat; }))
        << ',' << format_prob(avg([&](const SeedRun& r) { return rep(r).training_error; })) << ','
        << format_prob(avg([&](const SeedRun& r) { return rep(r).test_error_hat; })) << ',' << seeds << '\n';
    }
  }
  {
    detail::OutputFile f(cfg, "toy_runs.csv", result);
    f << "seed_index," << kIonCsvHeader << '\n';
    for (std::size_t s = 0; s < seeds; ++s)
      for (const IonReport* r : {&runs[s].nn, &runs[s].ada}) {
        f << s << ',';
        write_ion_csv_row(f.stream(), *r);
      }
  }
  log << "toy: " << seeds << " seeds, population " << pop.name() << "\n";
  return result;
}

inline RunResult run_sweep_iterations(const ExperimentConfig& cfg, std::ostream& log) {
  const Population pop = detail::config_population(cfg);
  const std::size_t seeds = cfg.n_seeds(), n = cfg.count("n"), mc = cfg.count("mc_samples");
  const std::vector<std::size_t> ms = cfg.list("m_list");
  const std::size_t m_max = *std::max_element(ms.begin(), ms.end());
  const BoostConfig bc = detail::boost_config(cfg.count("max_depth"), m_max, cfg.real("learning_rate"));
  const std::string exp = experiment_name(cfg.experiment());

  std::vector<std::vector<IonReport>> runs(seeds);
  parallel_chunks(seeds, cfg.workers(), [&](std::size_t s) {
    const LabelledSample data = sample(pop, n, derive_seed(cfg.global_seed(), exp, s, "train"));
    runs[s] = estimate_ion_staged(bc, pop, data.set, mc, derive_seed(cfg.global_seed(), exp, s, "mc"));
  });

  RunResult result;
  {
    detail::OutputFile f(cfg, "sweep_m.csv", result);
    f << "m,training_error,test_error,ion,seeds\n";
    for (auto m : ms) {
      std::vector<double> tr, te, ion;
      for (const auto& r : runs) {
        tr.push_back(r[m - 1].training_error);
        te.push_back(r[m - 1].test_error_hat);
        ion.push_back(r[m - 1].ion_hat);
      }
      f << m << ',' << format_prob(detail::mean(tr)) << ',' << format_prob(detail::mean(te)) << ','
        << format_prob(detail::mean(ion)) << ',' << seeds << '\n';
    }
  }
  {
    detail::OutputFile f(cfg, "sweep_m_runs.csv", result);
    f << "seed_index,m,training_error,test_error,ion\n";
    for (std::size_t s = 0; s < seeds; ++s)
      for (auto m : ms) {
        const IonReport& r = runs[s][m - 1];
        f << s << ',' << m << ',' << format_prob(r.training_error) << ',' << format_prob(r.test_error_hat) << ','
          << format_prob(r.ion_hat) << '\n';
      }
  }
  log << "sweep-m: " << seeds << " seeds, " << ms.size() << " stage counts, depth " << bc.max_depth << "\n";
  return result;
}

inline RunResult run_sweep_depth(const ExperimentConfig& cfg, std::ostream& log) {
  const Population pop = detail::config_population(cfg);
  const std::size_t seeds = cfg.n_seeds(), n = cfg.count("n"), mc = cfg.count("mc_samples");
  const std::vector<std::size_t> depths = cfg.list("depth_list");
  const std::size_t steps = cfg.count("n_steps");
  const double lr = cfg.real("learning_rate");
  const std::string exp = experiment_name(cfg.experiment());

  std::vector<std::vector<IonReport>> runs(seeds, std::vector<IonReport>(depths.size()));
  parallel_chunks(seeds * depths.size(), cfg.workers(), [&](std::size_t job) {
    const std::size_t s = job / depths.size(), j = job % depths.size();
    const LabelledSample data = sample(pop, n, derive_seed(cfg.global_seed(), exp, s, "train"));
    runs[s][j] = estimate_ion(MethodSpec::adaboost(detail::boost_config(depths[j], steps, lr)), pop, data.set, mc,
                              derive_seed(cfg.global_seed(), exp, s, "mc"));
  });

  RunResult result;
  {
    detail::OutputFile f(cfg, "sweep_depth.csv", result);
    f << "max_depth,training_error,test_error,ion,seeds\n";
    for (std::size_t j = 0; j < depths.size(); ++j) {
      std::vector<double> tr, te, ion;
      for (const auto& r : runs) {
        tr.push_back(r[j].training_error);
        te.push_back(r[j].test_error_hat);
        ion.push_back(r[j].ion_hat);
      }
      f << depths[j] << ',' << format_prob(detail::mean(tr)) << ',' << format_prob(detail::mean(te)) << ','
        << format_prob(detail::mean(ion)) << ',' << seeds << '\n';
    }
  }
  {
    detail::OutputFile f(cfg, "sweep_depth_runs.csv", result);
    f << "seed_index,max_depth,training_error,test_error,ion\n";
    for (std::size_t s = 0; s < seeds; ++s)
      for (std::size_t j = 0; j < depths.size(); ++j) {
        const IonReport& r = runs[s][j];
        f << s << ',' << depths[j] << ',' << format_prob(r.training_error) << ',' << format_prob(r.test_error_hat)
          << ',' << format_prob(r.ion_hat) << '\n';
      }
  }
  log << "sweep-depth: " << seeds << " seeds, " << depths.size() << " depths, " << steps << " stages\n";
  return result;
}

// Random trees of depth <= k against XOR of order k + 1, exact rationals.
inline RunResult run_xor_certify(const ExperimentConfig& cfg, std::ostream& log) {
  const std::vector<std::size_t> ks = cfg.list("k_list");
  for (auto k : ks)
    if (k + 1 > kMaxGridDimension)
      throw ConfigError("k_list entry " + std::to_string(k) + " exceeds the exact-integration limit " +
                        std::to_string(kMaxGridDimension - 1));
  const std::size_t batches = cfg.n_seeds(), trees = cfg.count("n_trees");
  const std::string exp = experiment_name(cfg.experiment());
  RunResult result;
  detail::OutputFile f(cfg, "xor_certify.csv", result);
  f << "batch,k,tree,depth,leaves,agreement,agreement_value,exact_half\n";
  const Rational half(1, 2);
  for (std::size_t b = 0; b < batches; ++b)
    for (auto k : ks) {
      Rng rng(mix_seed(derive_seed(cfg.global_seed(), exp, b, "trees"), {k}));
      std::size_t hits = 0;
      for (std::size_t t = 0; t < trees; ++t) {
        const DecisionTree tree = random_tree(k + 1, k, rng, t % 2 == 1);
        const Rational a = exact_agreement_with_xor(GridClassifier::from_tree(tree, Box::symmetric_unit(k + 1)), k + 1);
        hits += a == half ? 1 : 0;
        f << b << ',' << k << ',' << t << ',' << tree.depth() << ',' << tree.leaf_count() << ',' << a.str() << ','
          << format_exact(static_cast<double>(a)) << ',' << (a == half ? 1 : 0) << '\n';
      }
      log << "xor: batch " << b << " k=" << k << ": " << hits << "/" << trees << " trees agree with XOR_" << k + 1
          << " on exactly 1/2\n";
    }
  return result;
}

// Stump ensembles reduce to comonotone additive forms; XOR_2, ring and
// diagonal rules do not.
inline RunResult run_comonotone_certify(const ExperimentConfig& cfg, std::ostream& log) {
  const std::size_t batches = cfg.n_seeds(), count = cfg.count("n_ensembles"), stumps = cfg.count("n_stumps");
  const std::size_t points = cfg.count("n_points"), cells = cfg.count("grid_cells");
  const std::string exp = experiment_name(cfg.experiment());
  const Box box = Box::symmetric_unit(2);
  RunResult result;
  detail::OutputFile f(cfg, "comono_certify.csv", result);
  f << "kind,batch,index,max_margin_error,sign_mismatches,comonotonic,witness\n";
  std::size_t passing = 0;
  double worst = 0.0;
  for (std::size_t b = 0; b < batches; ++b)
    for (std::size_t e = 0; e < count; ++e) {
      Rng rng(mix_seed(derive_seed(cfg.global_seed(), exp, b, "ensembles"), {e}));
      const BoostedEnsemble ens = random_stump_ensemble(2, stumps, rng);
      const StumpEnsembleForm form = decompose_stump_ensemble(ens);
      double err = 0.0;
      std::size_t mismatches = 0;
      std::vector<double> x(2);
      for (std::size_t i = 0; i < points; ++i) {
        for (auto& v : x) v = rng.uniform_left_open(-1.0, 1.0);
        err = std::max(err, std::abs(form.evaluate(x) - ens.margin(x)));
        mismatches += form.predict(x) != ens.predict(x) ? 1 : 0;
      }
      const auto verdict = check_comonotonic(GridClassifier::from_ensemble(ens, box));
      passing += verdict.is_comonotonic ? 1 : 0;
      worst = std::max(worst, err);
      f << "stump_ensemble," << b << ',' << e << ',' << detail::fmt("%.3e", err) << ',' << mismatches << ','
        << (verdict.is_comonotonic ? 1 : 0) << ','
        << detail::csv_quote(verdict.witness ? describe(*verdict.witness) : "") << '\n';
    }
  struct Named {
    const char* name;
    GridClassifier grid;
  };
  const Named rules[] = {
      {"xor_2", GridClassifier::xor_grid(2)},
      {"ring_2d", GridClassifier::rasterize(make_population(PopulationKind::ring_2d, 0.0), cells)},
      {"diagonal_2d", GridClassifier::rasterize(make_population(PopulationKind::diagonal_2d, 0.0), cells)},
  };
  for (const auto& r : rules) {
    const auto verdict = check_comonotonic(r.grid);
    f << r.name << ",0,0,,," << (verdict.is_comonotonic ? 1 : 0) << ','
      << detail::csv_quote(verdict.witness ? describe(*verdict.witness) : "") << '\n';
    log << "comono: " << r.name << (verdict.is_comonotonic ? " is comonotonic" : " is not comonotonic: ")
        << (verdict.witness ? describe(*verdict.witness) : "") << "\n";
  }
  log << "comono: " << passing << "/" << batches * count << " stump ensembles comonotonic, max margin error "
      << detail::fmt("%.3e", worst) << "\n";
  return result;
}

inline RunResult run_stump_plateau(const ExperimentConfig& cfg, std::ostream& log) {
  const Population pop = detail::config_population(cfg);
  const std::size_t seeds = cfg.n_seeds(), n = cfg.count("n"), steps = cfg.count("n_steps");
  PlateauOptions opts;
  opts.contrast_depth = cfg.count("contrast_depth");
  opts.mc_samples = cfg.count("mc_samples");
  opts.learning_rate = cfg.real("learning_rate");
  const std::string exp = experiment_name(cfg.experiment());
  std::vector<PlateauCurve> curves(seeds);
  parallel_chunks(seeds, cfg.workers(), [&](std::size_t s) {
    curves[s] = stump_boost_plateau(pop, n, steps, derive_seed(cfg.global_seed(), exp, s, "run"), opts);
  });
  RunResult result;
  detail::OutputFile f(cfg, "plateau.csv", result);
  f << "seed_index,m,stump_test_error,contrast_depth,contrast_test_error\n";
  for (std::size_t s = 0; s < seeds; ++s) {
    double lo = 1.0, hi = 0.0;
    for (std::size_t m = 0; m < steps; ++m) {
      const double e = curves[s].stump_test_error[m];
      lo = std::min(lo, e);
      hi = std::max(hi, e);
      f << s << ',' << m + 1 << ',' << format_prob(e) << ',' << opts.contrast_depth << ','
        << format_prob(curves[s].contrast_test_error[m]) << '\n';
    }
    log << "plateau: seed " << s << " stump test error range [" << format_prob(lo) << ", " << format_prob(hi)
        << "], depth-" << opts.contrast_depth << " at m=" << std::min<std::size_t>(50, steps) << ": "
        << format_prob(curves[s].contrast_test_error[std::min<std::size_t>(50, steps) - 1]) << "\n";
  }
  return result;
}

inline SyntheticPanelOptions synthetic_options(const ExperimentConfig& cfg) {
  SyntheticPanelOptions o;
  o.parity_weight = cfg.real("parity_weight");
  o.linear_weight = cfg.real("linear_weight");
  o.noise_amplitude = cfg.real("noise_amplitude");
  o.untradable_rate = cfg.real("untradable_rate");
  o.missing_rate = cfg.real("missing_rate");
  return o;
}

inline std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_exact(v);
}

inline RunResult run_backtest(const ExperimentConfig& cfg, std::ostream& log) {
  const std::string exp = experiment_name(cfg.experiment());
  FactorPanel raw;
  if (cfg.text("panel").empty()) {
    raw = generate_synthetic_panel(cfg.count("months"), cfg.count("stocks"), cfg.count("factors"),
                                   derive_seed(cfg.global_seed(), exp, 0, "panel"), synthetic_options(cfg));
    log << "backtest: synthetic panel, " << raw.size() << " rows\n";
  } else {
    raw = load_panel(cfg.text("panel"));
    log << "backtest: loaded " << raw.size() << " rows from " << cfg.text("panel") << "\n";
  }
  const PreprocessResult pre = preprocess(raw);
  log << "backtest: dropped " << pre.report.rows_dropped << " untradable rows, " << pre.report.dropped_factors.size()
      << " factors";
  for (const auto& d : pre.report.dropped_factors) log << ' ' << d;
  log << "; filled " << pre.report.cells_filled << " cells\n";
  const LabeledPanel labelled = label_cross_section(pre.panel);
  const auto [train, test] = split_by_month(labelled, static_cast<int>(cfg.count("cutoff")));

  RunResult result;
  const auto grid = auc_grid(train, test, cfg.list("depth_list"), cfg.list("steps_list"), cfg.real("learning_rate"));
  {
    detail::OutputFile f(cfg, "auc_grid.csv", result);
    f << "max_depth,n_steps,train_auc,train_err,test_auc,test_err\n";
    for (const auto& r : grid)
      f << r.max_depth << ',' << r.n_steps << ',' << format_prob(r.train_auc) << ',' << format_prob(r.train_err) << ','
        << format_prob(r.test_auc) << ',' << format_prob(r.test_err) << '\n';
  }

  StrategyConfig sc;
  sc.n_long = cfg.count("n_long");
  sc.n_short = cfg.count("n_short");
  sc.cost_rate = cfg.real("cost_rate");
  sc.mode = cfg.text("mode") == "long_only" ? StrategyMode::long_only : StrategyMode::long_short;
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const BoostedEnsemble model = fit_adaboost(
      to_training_set(train), detail::boost_config(cfg.count("strategy_depth"), cfg.count("strategy_steps"),
                                                   cfg.real("strategy_learning_rate")));
  const StrategyResult sr = run_strategy(model, test, sc);
  {
    detail::OutputFile f(cfg, "equity_curve.csv", result);
    f << "month_id,gross,net,equity\n";
    for (std::size_t t = 0; t < sr.month_ids.size(); ++t)
      f << sr.month_ids[t] << ',' << format_exact(sr.gross[t]) << ',' << format_exact(sr.net[t]) << ','
        << format_exact(sr.equity[t]) << '\n';
  }
  {
    detail::OutputFile f(cfg, "summary.csv", result);
    f << "series,win_rate,sharpe,avg_return,std,max_drawdown\n";
    for (int which = 0; which < 2; ++which) {
      const auto& series = which == 0 ? sr.net : sr.gross;
      if (series.size() < 2) throw DataError("backtest: the test split needs at least 2 months for a summary");
      const PerformanceSummary ps = performance_summary(series);
      f << (which == 0 ? "net" : "gross") << ',' << format_metric(ps.win_rate) << ',' << format_metric(ps.sharpe)
        << ',' << format_metric(ps.avg_return) << ',' << format_metric(ps.std) << ','
        << format_metric(ps.max_drawdown) << '\n';
    }
  }
  log << "backtest: " << sr.month_ids.size() << " test months, final equity " << format_exact(sr.equity.back())
      << "\n";
  return result;
}

inline RunResult run_synth_panel(const ExperimentConfig& cfg, std::ostream& log) {
  const FactorPanel p =
      generate_synthetic_panel(cfg.count("months"), cfg.count("stocks"), cfg.count("factors"),
                               derive_seed(cfg.global_seed(), experiment_name(cfg.experiment()), 0, "panel"),
                               synthetic_options(cfg));
  RunResult result;
  detail::OutputFile f(cfg, "panel.csv", result);
  write_panel(f.stream(), p);
  log << "synth-panel: " << p.size() << " rows\n";
  return result;
}

inline RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  switch (cfg.experiment()) {
    case Experiment::toy_table1: return run_toy(cfg, log);
    case Experiment::sweep_iterations: return run_sweep_iterations(cfg, log);
    case Experiment::sweep_depth: return run_sweep_depth(cfg, log);
    case Experiment::xor_certify: return run_xor_certify(cfg, log);
    case Experiment::comonotone_certify: return run_comonotone_certify(cfg, log);
    case Experiment::stump_plateau: return run_stump_plateau(cfg, log);
    case Experiment::backtest: return run_backtest(cfg, log);
    case Experiment::synth_panel: return run_synth_panel(cfg, log);
  }
  throw ConfigError("unknown experiment");
}

}  // namespace ionboost
