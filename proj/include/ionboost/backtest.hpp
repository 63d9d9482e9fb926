#pragma once

// Monthly factor panels, cross-sectional labelling, AUC and equal-weighted
// long-only / long-short strategy accounting.
//
// Panel CSV (header required):
//   month_id,ticker,tradable,next_return,f_<name1>,...,f_<nameK>
// An empty factor cell is a missing value. next_return is the return over the
// month following month_id, so a row's factors are known when it is traded.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ionboost/adaboost.hpp"
#include "ionboost/labels.hpp"
#include "ionboost/population.hpp"
#include "ionboost/rng.hpp"

namespace ionboost {

struct PanelRow {
  int month_id = 0;
  std::string ticker;
  bool tradable = true;
  double next_return = 0.0;
  std::vector<std::optional<double>> factors;

  bool operator==(const PanelRow&) const = default;
};

struct FactorPanel {
  std::vector<std::string> factor_names;
  std::vector<PanelRow> rows;

  std::size_t size() const noexcept { return rows.size(); }

  std::vector<int> months() const {
    std::set<int> m;
    for (const auto& r : rows) m.insert(r.month_id);
    return {m.begin(), m.end()};
  }

  // Throws DataError on a duplicated (month_id, ticker) or a ragged row.
  void validate() const {
    std::set<std::pair<int, std::string>> seen;
    for (const auto& r : rows) {
      if (r.factors.size() != factor_names.size())
        throw DataError("panel: row (" + std::to_string(r.month_id) + ", " + r.ticker + ") has " +
                        std::to_string(r.factors.size()) + " factors, expected " + std::to_string(factor_names.size()));
      if (!seen.emplace(r.month_id, r.ticker).second)
        throw DataError("panel: duplicate key (month_id=" + std::to_string(r.month_id) + ", ticker=" + r.ticker + ")");
    }
  }

  bool operator==(const FactorPanel&) const = default;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  if (b < e && *b == '+') ++b;
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && b != e;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline FactorPanel read_panel(std::istream& is, const std::string& source = "panel") {
  std::string line;
  // Leading '#' lines are provenance comments.
  do {
    if (!std::getline(is, line)) throw DataError(source + ": empty file (header required)");
  } while (!line.empty() && line[0] == '#');
  const auto header = detail::split_csv_line(line);
  const char* required[] = {"month_id", "ticker", "tradable", "next_return"};
  for (std::size_t i = 0; i < 4; ++i)
    if (header.size() <= i || header[i] != required[i])
      throw DataError(source + ": missing required column '" + required[i] + "' at position " + std::to_string(i + 1));
  FactorPanel panel;
  for (std::size_t i = 4; i < header.size(); ++i) {
    if (header[i].rfind("f_", 0) != 0 || header[i].size() < 3)
      throw DataError(source + ": factor column '" + header[i] + "' must be named f_<name>");
    panel.factor_names.push_back(header[i].substr(2));
  }
  std::size_t row_no = 1;
  while (std::getline(is, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    auto where = [&](const std::string& col) { return source + ": row " + std::to_string(row_no) + ", column " + col; };
    if (cells.size() != header.size())
      throw DataError(source + ": row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()));
    PanelRow r;
    double month = 0.0;
    if (!detail::parse_double(cells[0], month) || month != std::floor(month))
      throw DataError(where("month_id") + ": not an integer '" + cells[0] + "'");
    r.month_id = static_cast<int>(month);
    if (cells[1].empty()) throw DataError(where("ticker") + ": empty ticker");
    r.ticker = cells[1];
    const std::string& t = cells[2];
    if (t == "1" || t == "true" || t == "TRUE" || t == "True") r.tradable = true;
    else if (t == "0" || t == "false" || t == "FALSE" || t == "False") r.tradable = false;
    else throw DataError(where("tradable") + ": expected 0/1/true/false, got '" + t + "'");
    if (!detail::parse_double(cells[3], r.next_return))
      throw DataError(where("next_return") + ": unparseable number '" + cells[3] + "'");
    r.factors.reserve(panel.factor_names.size());
    for (std::size_t i = 4; i < cells.size(); ++i) {
      if (cells[i].empty()) {
        r.factors.emplace_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      if (!detail::parse_double(cells[i], v)) throw DataError(where(header[i]) + ": unparseable number '" + cells[i] + "'");
      r.factors.emplace_back(v);
    }
    panel.rows.push_back(std::move(r));
  }
  panel.validate();
  return panel;
}

inline FactorPanel load_panel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open panel file '" + path + "'");
  return read_panel(in, path);
}

inline void write_panel(std::ostream& os, const FactorPanel& panel) {
  os << "month_id,ticker,tradable,next_return";
  for (const auto& n : panel.factor_names) os << ",f_" << n;
  os << '\n';
  for (const auto& r : panel.rows) {
    os << r.month_id << ',' << r.ticker << ',' << (r.tradable ? 1 : 0) << ',' << detail::format_number(r.next_return);
    for (const auto& f : r.factors) {
      os << ',';
      if (f) os << detail::format_number(*f);
    }
    os << '\n';
  }
}

struct PreprocessReport {
  std::size_t rows_dropped = 0;
  std::vector<std::string> dropped_factors;
  std::size_t cells_filled = 0;
};

struct PreprocessResult {
  FactorPanel panel;
  PreprocessReport report;
};

// Drops untradable rows, then factor columns with a missing fraction above
// `max_missing_fraction`, then fills the remaining missing cells with 0.
inline PreprocessResult preprocess(const FactorPanel& in, double max_missing_fraction = 0.10) {
  PreprocessResult out;
  std::vector<const PanelRow*> kept;
  for (const auto& r : in.rows) {
    if (r.tradable) kept.push_back(&r);
    else ++out.report.rows_dropped;
  }
  if (kept.empty()) throw DataError("preprocess: no tradable rows left");

  const std::size_t k = in.factor_names.size();
  std::vector<std::size_t> missing(k, 0);
  for (const auto* r : kept)
    for (std::size_t j = 0; j < k; ++j) missing[j] += r->factors[j] ? 0 : 1;
  std::vector<std::size_t> keep_cols;
  for (std::size_t j = 0; j < k; ++j) {
    const double frac = static_cast<double>(missing[j]) / static_cast<double>(kept.size());
    if (frac > max_missing_fraction) out.report.dropped_factors.push_back(in.factor_names[j]);
    else keep_cols.push_back(j);
  }
  if (keep_cols.empty()) throw DataError("preprocess: every factor exceeds the missing-data limit");

  for (auto j : keep_cols) out.panel.factor_names.push_back(in.factor_names[j]);
  out.panel.rows.reserve(kept.size());
  for (const auto* r : kept) {
    PanelRow row{r->month_id, r->ticker, r->tradable, r->next_return, {}};
    row.factors.reserve(keep_cols.size());
    for (auto j : keep_cols) {
      if (r->factors[j]) {
        row.factors.push_back(r->factors[j]);
      } else {
        row.factors.emplace_back(0.0);
        ++out.report.cells_filled;
      }
    }
    out.panel.rows.push_back(std::move(row));
  }
  return out;
}

struct LabeledPanel {
  FactorPanel panel;
  std::vector<Label> labels;  // aligned with panel.rows

  std::size_t size() const noexcept { return labels.size(); }
};

namespace detail {

inline std::map<int, std::vector<std::size_t>> rows_by_month(const FactorPanel& panel) {
  std::map<int, std::vector<std::size_t>> by;
  for (std::size_t i = 0; i < panel.rows.size(); ++i) by[panel.rows[i].month_id].push_back(i);
  return by;
}

}  // namespace detail

// Per month, rows ranked by next_return (descending, ties by ticker): the top
// floor(n/2) get +1 and the rest -1, so an odd month's median row is -1.
inline LabeledPanel label_cross_section(const FactorPanel& panel) {
  LabeledPanel out{panel, std::vector<Label>(panel.rows.size(), -1)};
  for (auto& [month, idx] : detail::rows_by_month(panel)) {
    if (idx.size() < 2)
      throw DataError("label_cross_section: month " + std::to_string(month) + " has fewer than 2 stocks");
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = panel.rows[a];
      const auto& rb = panel.rows[b];
      if (ra.next_return != rb.next_return) return ra.next_return > rb.next_return;
      return ra.ticker < rb.ticker;
    });
    for (std::size_t r = 0; r < idx.size() / 2; ++r) out.labels[idx[r]] = 1;
  }
  return out;
}

inline LabeledPanel subset(const LabeledPanel& in, const std::vector<std::size_t>& rows) {
  LabeledPanel out;
  out.panel.factor_names = in.panel.factor_names;
  for (auto i : rows) {
    out.panel.rows.push_back(in.panel.rows[i]);
    out.labels.push_back(in.labels[i]);
  }
  return out;
}

// Months <= cutoff train, months > cutoff test.
inline std::pair<LabeledPanel, LabeledPanel> split_by_month(const LabeledPanel& in, int cutoff) {
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < in.panel.rows.size(); ++i) (in.panel.rows[i].month_id <= cutoff ? train : test).push_back(i);
  if (train.empty()) throw DataError("split_by_month: no months at or before cutoff " + std::to_string(cutoff));
  if (test.empty()) throw DataError("split_by_month: no months after cutoff " + std::to_string(cutoff));
  return {subset(in, train), subset(in, test)};
}

inline TrainingSet to_training_set(const LabeledPanel& lp) {
  const std::size_t d = lp.panel.factor_names.size();
  if (d == 0) throw DataError("to_training_set: panel has no factors");
  std::vector<double> xs;
  xs.reserve(lp.size() * d);
  for (const auto& r : lp.panel.rows)
    for (const auto& f : r.factors) {
      if (!f) throw DataError("to_training_set: missing factor value (run preprocess first)");
      xs.push_back(*f);
    }
  return TrainingSet(d, std::move(xs), lp.labels);
}

// Probability that a random positive outscores a random negative, ties
// counting one half. Rank-sum form, O(n log n).
inline double auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0.0, neg = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] > 0) {
        pos += 1.0;
        rank_sum += mid_rank;
      } else {
        neg += 1.0;
      }
    }
    i = j;
  }
  if (pos == 0.0 || neg == 0.0) throw std::invalid_argument("auc: both classes must be present");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

enum class StrategyMode { long_only, long_short };

struct StrategyConfig {
  std::size_t n_long = 50;
  std::size_t n_short = 50;
  double cost_rate = 0.0015;
  StrategyMode mode = StrategyMode::long_short;

  void validate() const {
    if (n_long < 1) throw std::invalid_argument("StrategyConfig: n_long must be >= 1");
    if (!(cost_rate >= 0.0)) throw std::invalid_argument("StrategyConfig: cost_rate must be >= 0");
    if (mode == StrategyMode::long_short && n_short < 1)
      throw std::invalid_argument("StrategyConfig: long_short needs n_short >= 1");
  }
};

struct StrategyResult {
  std::vector<int> month_ids;
  std::vector<double> gross;
  std::vector<double> cost;
  std::vector<double> net;
  std::vector<double> equity;  // compounded from 1.0
};

// Ranks each month's rows by score (descending, ties by ticker), holds the top
// n_long long and, in long_short mode, the bottom n_short short, equal weight
// per leg. Gross return is mean(long) - mean(short) (or mean(long)). Each leg
// pays cost_rate times the fraction of its names replaced since the previous
// month; the first month is a full entry.
inline StrategyResult run_strategy_scores(const FactorPanel& panel, std::span<const double> scores,
                                          const StrategyConfig& cfg) {
  cfg.validate();
  if (scores.size() != panel.rows.size()) throw std::invalid_argument("run_strategy: one score per row required");
  const bool ls = cfg.mode == StrategyMode::long_short;
  const std::size_t need = cfg.n_long + (ls ? cfg.n_short : 0);
  StrategyResult out;
  std::set<std::string> prev_long, prev_short;
  bool first = true;
  double equity = 1.0;
  std::optional<int> prev_month;
  for (auto& [month, idx] : detail::rows_by_month(panel)) {
    if (prev_month && month != *prev_month + 1)
      throw DataError("run_strategy: test months must be contiguous (gap after month " + std::to_string(*prev_month) + ")");
    prev_month = month;
    if (idx.size() < need)
      throw DataError("run_strategy: month " + std::to_string(month) + " has " + std::to_string(idx.size()) +
                      " stocks, need " + std::to_string(need));
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return panel.rows[a].ticker < panel.rows[b].ticker;
    });
    auto leg = [&](std::size_t begin, std::size_t count, std::set<std::string>& names) {
      double sum = 0.0;
      names.clear();
      for (std::size_t t = begin; t < begin + count; ++t) {
        sum += panel.rows[idx[t]].next_return;
        names.insert(panel.rows[idx[t]].ticker);
      }
      return sum / static_cast<double>(count);
    };
    auto replaced = [&](const std::set<std::string>& now, const std::set<std::string>& before) {
      if (first) return 1.0;
      std::size_t changed = 0;
      for (const auto& n : now) changed += before.count(n) ? 0 : 1;
      return static_cast<double>(changed) / static_cast<double>(now.size());
    };

    std::set<std::string> long_names, short_names;
    double gross = leg(0, cfg.n_long, long_names);
    double turnover = replaced(long_names, prev_long);
    if (ls) {
      gross -= leg(idx.size() - cfg.n_short, cfg.n_short, short_names);
      turnover += replaced(short_names, prev_short);
    }
    const double cost = cfg.cost_rate * turnover;
    const double net = gross - cost;
    equity *= 1.0 + net;
    out.month_ids.push_back(month);
    out.gross.push_back(gross);
    out.cost.push_back(cost);
    out.net.push_back(net);
    out.equity.push_back(equity);
    prev_long = std::move(long_names);
    prev_short = std::move(short_names);
    first = false;
  }
  return out;
}

inline std::vector<double> margins(const BoostedEnsemble& ens, const TrainingSet& t) {
  std::vector<double> s(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) s[i] = ens.margin(t.x(i));
  return s;
}

inline StrategyResult run_strategy(const BoostedEnsemble& ens, const LabeledPanel& test, const StrategyConfig& cfg) {
  if (ens.dimension() != test.panel.factor_names.size())
    throw std::invalid_argument("run_strategy: ensemble was trained on " + std::to_string(ens.dimension()) +
                                " factors, panel has " + std::to_string(test.panel.factor_names.size()));
  const std::vector<double> s = margins(ens, to_training_set(test));
  return run_strategy_scores(test.panel, s, cfg);
}

struct PerformanceSummary {
  double win_rate = 0.0;
  double sharpe = 0.0;
  double avg_return = 0.0;  // annualised arithmetic mean
  double std = 0.0;         // annualised sample standard deviation
  double max_drawdown = 0.0;
};

// Monthly series -> annualised figures (x12, x sqrt 12, zero risk-free rate).
// Zero volatility gives a Sharpe of +/-infinity with the sign of the mean
// (0 if the mean is 0 too). Drawdown is measured on the equity curve
// compounded from 1.0, which counts as the first peak.
inline PerformanceSummary performance_summary(std::span<const double> monthly) {
  if (monthly.size() < 2) throw std::invalid_argument("performance_summary: need at least 2 months");
  const double n = static_cast<double>(monthly.size());
  PerformanceSummary s;
  double sum = 0.0, wins = 0.0;
  for (double r : monthly) {
    sum += r;
    wins += r > 0.0 ? 1.0 : 0.0;
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (double r : monthly) ss += (r - mean) * (r - mean);
  const bool constant = std::all_of(monthly.begin(), monthly.end(), [&](double r) { return r == monthly[0]; });
  const double sd = constant ? 0.0 : std::sqrt(ss / (n - 1.0));
  s.win_rate = wins / n;
  s.avg_return = mean * 12.0;
  s.std = sd * std::sqrt(12.0);
  if (s.std > 0.0) s.sharpe = s.avg_return / s.std;
  else if (mean > 0.0) s.sharpe = std::numeric_limits<double>::infinity();
  else if (mean < 0.0) s.sharpe = -std::numeric_limits<double>::infinity();
  double equity = 1.0, peak = 1.0, dd = 0.0;
  for (double r : monthly) {
    equity *= 1.0 + r;
    peak = std::max(peak, equity);
    dd = std::max(dd, (peak - equity) / peak);
  }
  s.max_drawdown = std::clamp(dd, 0.0, 1.0);
  return s;
}

struct SyntheticPanelOptions {
  double parity_weight = 0.03;   // c1 on sign(f1 f2 f3)
  double linear_weight = 0.005;  // c2 on f4
  double noise_amplitude = 0.02;
  double untradable_rate = 0.0;
  double missing_rate = 0.0;  // per factor cell
};

// Standard-normal exposures; next_return = c1 sign(f1 f2 f3) + c2 f4 + noise.
inline FactorPanel generate_synthetic_panel(std::size_t n_months, std::size_t n_stocks, std::size_t n_factors,
                                            std::uint64_t seed, const SyntheticPanelOptions& opts = {}) {
  if (n_factors < 3) throw std::invalid_argument("generate_synthetic_panel: n_factors must be >= 3");
  if (n_months < 1 || n_stocks < 1) throw std::invalid_argument("generate_synthetic_panel: empty panel requested");
  FactorPanel panel;
  for (std::size_t j = 0; j < n_factors; ++j) panel.factor_names.push_back("factor" + std::to_string(j + 1));
  Rng rng(seed);
  std::vector<double> f(n_factors);
  panel.rows.reserve(n_months * n_stocks);
  for (std::size_t m = 0; m < n_months; ++m) {
    for (std::size_t s = 0; s < n_stocks; ++s) {
      for (auto& v : f) v = rng.normal();
      const double eps = rng.normal();
      PanelRow row;
      row.month_id = static_cast<int>(m + 1);
      std::string digits = std::to_string(s + 1);
      row.ticker = "S" + std::string(digits.size() < 5 ? 5 - digits.size() : 0, '0') + digits;
      row.next_return = opts.parity_weight * sign_label(f[0] * f[1] * f[2]) +
                        (n_factors > 3 ? opts.linear_weight * f[3] : 0.0) + opts.noise_amplitude * eps;
      row.tradable = !(opts.untradable_rate > 0.0 && rng.bernoulli(opts.untradable_rate));
      row.factors.reserve(n_factors);
      for (double v : f) {
        if (opts.missing_rate > 0.0 && rng.bernoulli(opts.missing_rate)) row.factors.emplace_back(std::nullopt);
        else row.factors.emplace_back(v);
      }
      panel.rows.push_back(std::move(row));
    }
  }
  return panel;
}

struct AucGridRow {
  std::size_t max_depth = 0;
  std::size_t n_steps = 0;
  double train_auc = 0.0;
  double train_err = 0.0;
  double test_auc = 0.0;
  double test_err = 0.0;
};

namespace detail {

struct StagedScores {
  std::vector<std::vector<double>> at;  // one vector per requested prefix
};

inline std::vector<std::vector<double>> prefix_margins(const BoostedEnsemble& ens, const TrainingSet& t,
                                                       const std::vector<std::size_t>& prefixes) {
  std::vector<std::vector<double>> out(prefixes.size(), std::vector<double>(t.size(), 0.0));
  std::vector<double> f(t.size(), 0.0);
  std::size_t done = 0;
  std::vector<std::size_t> order(prefixes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return prefixes[a] < prefixes[b]; });
  for (auto p : order) {
    const std::size_t upto = std::min(prefixes[p], ens.size());
    for (; done < upto; ++done) {
      const double w = ens.stage_weight(done);
      const auto& tree = ens.stages()[done].tree;
      for (std::size_t i = 0; i < t.size(); ++i) f[i] += w * tree.predict(t.x(i));
    }
    out[p] = f;
  }
  return out;
}

inline double sign_error(std::span<const double> s, std::span<const Label> y) {
  std::size_t miss = 0;
  for (std::size_t i = 0; i < s.size(); ++i) miss += sign_label(s[i]) != y[i] ? 1 : 0;
  return static_cast<double>(miss) / static_cast<double>(s.size());
}

}  // namespace detail

// One AdaBoost fit per depth at the largest step count; smaller step counts
// are prefixes of the same run.
inline std::vector<AucGridRow> auc_grid(const LabeledPanel& train, const LabeledPanel& test,
                                        const std::vector<std::size_t>& depths, const std::vector<std::size_t>& steps,
                                        double learning_rate) {
  if (depths.empty() || steps.empty()) throw std::invalid_argument("auc_grid: depth and step lists must be non-empty");
  const TrainingSet tr = to_training_set(train);
  const TrainingSet te = to_training_set(test);
  std::vector<AucGridRow> rows;
  for (auto depth : depths) {
    BoostConfig cfg;
    cfg.max_depth = depth;
    cfg.n_steps = *std::max_element(steps.begin(), steps.end());
    cfg.learning_rate = learning_rate;
    const BoostedEnsemble ens = fit_adaboost(tr, cfg);
    const auto tr_scores = detail::prefix_margins(ens, tr, steps);
    const auto te_scores = detail::prefix_margins(ens, te, steps);
    for (std::size_t s = 0; s < steps.size(); ++s) {
      AucGridRow row;
      row.max_depth = depth;
      row.n_steps = steps[s];
      row.train_auc = auc(tr_scores[s], tr.labels());
      row.train_err = detail::sign_error(tr_scores[s], tr.labels());
      row.test_auc = auc(te_scores[s], te.labels());
      row.test_err = detail::sign_error(te_scores[s], te.labels());
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace ionboost
