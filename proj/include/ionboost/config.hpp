#pragma once

// Experiment configuration: a typed key table per experiment, a key = value
// file layer and a flag layer. Flags override the file. Within one layer a key
// may repeat only with the same value.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionboost/rng.hpp"

namespace ionboost {

// Invalid configuration or command line; maps to the usage exit status.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment {
  toy_table1,
  sweep_iterations,
  sweep_depth,
  xor_certify,
  comonotone_certify,
  stump_plateau,
  backtest,
  synth_panel,
};

inline constexpr Experiment kAllExperiments[] = {
    Experiment::toy_table1,         Experiment::sweep_iterations, Experiment::sweep_depth,
    Experiment::xor_certify,        Experiment::comonotone_certify, Experiment::stump_plateau,
    Experiment::backtest,           Experiment::synth_panel,
};

inline const char* subcommand_name(Experiment e) {
  switch (e) {
    case Experiment::toy_table1: return "toy";
    case Experiment::sweep_iterations: return "sweep-m";
    case Experiment::sweep_depth: return "sweep-depth";
    case Experiment::xor_certify: return "xor";
    case Experiment::comonotone_certify: return "comono";
    case Experiment::stump_plateau: return "plateau";
    case Experiment::backtest: return "backtest";
    case Experiment::synth_panel: return "synth-panel";
  }
  return "?";
}

inline const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::toy_table1: return "toy_table1";
    case Experiment::sweep_iterations: return "sweep_iterations";
    case Experiment::sweep_depth: return "sweep_depth";
    case Experiment::xor_certify: return "xor_certify";
    case Experiment::comonotone_certify: return "comonotone_certify";
    case Experiment::stump_plateau: return "stump_plateau";
    case Experiment::backtest: return "backtest";
    case Experiment::synth_panel: return "synth_panel";
  }
  return "?";
}

inline std::optional<Experiment> experiment_from_name(const std::string& s) {
  for (auto e : kAllExperiments)
    if (s == subcommand_name(e) || s == experiment_name(e)) return e;
  return std::nullopt;
}

enum class ValueType { unsigned_int, real, text, count_list, choice };

struct KeySpec {
  std::string name;
  ValueType type = ValueType::text;
  std::string default_value;
  std::string help;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  bool min_exclusive = false;
  bool max_exclusive = false;
  std::vector<std::string> choices;
};

namespace detail {

inline bool parse_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// "1..250", "1,2,4" or a mix such as "1..3,8".
inline std::optional<std::vector<std::size_t>> parse_count_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto dots = item.find("..");
    std::uint64_t a = 0, b = 0;
    if (dots == std::string::npos) {
      if (!parse_u64(item, a)) return std::nullopt;
      b = a;
    } else if (!parse_u64(trim(item.substr(0, dots)), a) || !parse_u64(trim(item.substr(dots + 2)), b) || b < a) {
      return std::nullopt;
    }
    if (b - a > 1000000) return std::nullopt;
    for (std::uint64_t v = a; v <= b; ++v) out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) return std::nullopt;
  return out;
}

// Optimal string alignment distance (adjacent transpositions cost 1).
inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
    }
  return d[n][m];
}

inline KeySpec make_key(std::string name, ValueType type, std::string def, std::string help) {
  KeySpec k;
  k.name = std::move(name);
  k.type = type;
  k.default_value = std::move(def);
  k.help = std::move(help);
  return k;
}

inline KeySpec uint_key(std::string name, std::string def, std::string help, double min = 1) {
  KeySpec k = make_key(std::move(name), ValueType::unsigned_int, std::move(def), std::move(help));
  k.min = min;
  return k;
}

inline KeySpec real_key(std::string name, std::string def, std::string help, double min, double max,
                        bool min_exclusive = false, bool max_exclusive = false) {
  KeySpec k = make_key(std::move(name), ValueType::real, std::move(def), std::move(help));
  k.min = min;
  k.max = max;
  k.min_exclusive = min_exclusive;
  k.max_exclusive = max_exclusive;
  return k;
}

inline KeySpec text_key(std::string name, std::string def, std::string help) {
  return make_key(std::move(name), ValueType::text, std::move(def), std::move(help));
}

inline KeySpec list_key(std::string name, std::string def, std::string help) {
  return make_key(std::move(name), ValueType::count_list, std::move(def), std::move(help));
}

inline KeySpec choice_key(std::string name, std::string def, std::string help, std::vector<std::string> choices) {
  KeySpec k = make_key(std::move(name), ValueType::choice, std::move(def), std::move(help));
  k.choices = std::move(choices);
  return k;
}

}  // namespace detail

// Keys that identify where output goes or how it is computed, not what is
// computed; they are left out of the config hash.
inline bool is_volatile_key(const std::string& key) { return key == "out" || key == "workers"; }

inline std::vector<KeySpec> experiment_keys(Experiment e) {
  using namespace detail;
  const std::vector<std::string> pops = {"half_plane_2d", "parity_6d", "ring_2d", "diagonal_2d", "xor_2", "xor_3",
                                         "xor_4",         "xor_5",     "xor_6"};
  std::vector<KeySpec> keys = {
      uint_key("seed", "42", "global seed", 0),
      uint_key("workers", "1", "worker threads"),
      text_key("out", "out", "output directory"),
  };
  auto add = [&](std::initializer_list<KeySpec> ks) { keys.insert(keys.end(), ks); };
  const KeySpec lr = real_key("learning_rate", "1", "shrinkage nu", 0.0, 1.0, true, false);
  const KeySpec mc = uint_key("mc_samples", "100000", "Monte Carlo points per estimate");
  switch (e) {
    case Experiment::toy_table1:
      add({uint_key("seeds", "20", "number of training sets"), choice_key("population", "half_plane_2d", "population", pops),
           real_key("q", "0.1", "Bayes error", 0.0, 0.5, false, true), uint_key("n", "500", "training set size"), mc,
           uint_key("max_depth", "4", "AdaBoost tree depth"), uint_key("n_steps", "50", "AdaBoost stages"), lr});
      break;
    case Experiment::sweep_iterations:
      add({uint_key("seeds", "10", "number of training sets"), choice_key("population", "parity_6d", "population", pops),
           real_key("q", "0.1", "Bayes error", 0.0, 0.5, false, true), uint_key("n", "500", "training set size"), mc,
           uint_key("max_depth", "5", "tree depth"), list_key("m_list", "1..250", "stage counts to report"), lr});
      break;
    case Experiment::sweep_depth:
      add({uint_key("seeds", "10", "number of training sets"), choice_key("population", "parity_6d", "population", pops),
           real_key("q", "0.1", "Bayes error", 0.0, 0.5, false, true), uint_key("n", "500", "training set size"), mc,
           list_key("depth_list", "1..8", "tree depths"), uint_key("n_steps", "250", "AdaBoost stages"), lr});
      break;
    case Experiment::xor_certify:
      add({uint_key("seeds", "1", "independent batches of trees"),
           list_key("k_list", "1..3", "tree depth bounds k, checked against XOR of order k+1"),
           uint_key("n_trees", "100", "random trees per k and batch")});
      break;
    case Experiment::comonotone_certify:
      add({uint_key("seeds", "1", "independent batches of ensembles"),
           uint_key("n_ensembles", "100", "random stump ensembles per batch"),
           uint_key("n_stumps", "20", "stumps per ensemble"), uint_key("n_points", "1000", "margin check points"),
           uint_key("grid_cells", "16", "cells per axis for ring and diagonal rasters")});
      break;
    case Experiment::stump_plateau:
      add({uint_key("seeds", "1", "number of training sets"), choice_key("population", "xor_2", "population", pops),
           real_key("q", "0", "Bayes error", 0.0, 0.5, false, true), uint_key("n", "1000", "training set size"), mc,
           uint_key("n_steps", "1000", "stages"), uint_key("contrast_depth", "2", "depth of the contrast run"), lr});
      break;
    case Experiment::backtest:
      add({text_key("panel", "", "panel CSV; empty generates a synthetic panel from seed"),
           uint_key("months", "60", "synthetic months"), uint_key("stocks", "200", "synthetic stocks per month"),
           uint_key("factors", "10", "synthetic factors", 3),
           real_key("parity_weight", "0.03", "synthetic c1", 0.0, 1e6),
           real_key("linear_weight", "0.005", "synthetic c2", 0.0, 1e6),
           real_key("noise_amplitude", "0.02", "synthetic noise scale", 0.0, 1e6),
           real_key("untradable_rate", "0", "synthetic untradable fraction", 0.0, 1.0),
           real_key("missing_rate", "0", "synthetic missing cell fraction", 0.0, 1.0),
           uint_key("cutoff", "40", "last training month"), list_key("depth_list", "1,2,4,6,8", "grid depths"),
           list_key("steps_list", "10,50,100", "grid stage counts"),
           real_key("learning_rate", "0.1", "grid shrinkage", 0.0, 1.0, true, false),
           uint_key("strategy_depth", "6", "strategy model depth"),
           uint_key("strategy_steps", "100", "strategy model stages"),
           real_key("strategy_learning_rate", "1", "strategy model shrinkage", 0.0, 1.0, true, false),
           uint_key("n_long", "50", "long leg size"), uint_key("n_short", "50", "short leg size", 0),
           real_key("cost_rate", "0.0015", "cost per fully replaced leg", 0.0, 1.0),
           choice_key("mode", "long_short", "strategy mode", {"long_short", "long_only"})});
      break;
    case Experiment::synth_panel:
      add({uint_key("months", "60", "months"), uint_key("stocks", "200", "stocks per month"),
           uint_key("factors", "10", "factors", 3), real_key("parity_weight", "0.03", "c1", 0.0, 1e6),
           real_key("linear_weight", "0.005", "c2", 0.0, 1e6),
           real_key("noise_amplitude", "0.02", "noise scale", 0.0, 1e6),
           real_key("untradable_rate", "0", "untradable fraction", 0.0, 1.0),
           real_key("missing_rate", "0", "missing cell fraction", 0.0, 1.0)});
      break;
  }
  return keys;
}

struct ConfigValue {
  std::string text;
  std::string source;
};

class ExperimentConfig {
 public:
  ExperimentConfig() = default;
  ExperimentConfig(Experiment e, std::map<std::string, ConfigValue> values) : experiment_(e), values_(std::move(values)) {}

  Experiment experiment() const noexcept { return experiment_; }
  const std::map<std::string, ConfigValue>& values() const noexcept { return values_; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError(std::string("config key '") + key + "' is not defined for " + subcommand_name(experiment_));
    return it->second.text;
  }
  std::uint64_t u64(const std::string& key) const {
    std::uint64_t v = 0;
    if (!detail::parse_u64(text(key), v)) throw ConfigError("config key '" + key + "' is not an unsigned integer");
    return v;
  }
  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }
  double real(const std::string& key) const {
    double v = 0.0;
    if (!detail::parse_real(text(key), v)) throw ConfigError("config key '" + key + "' is not a number");
    return v;
  }
  std::vector<std::size_t> list(const std::string& key) const {
    auto v = detail::parse_count_list(text(key));
    if (!v) throw ConfigError("config key '" + key + "' is not a count list");
    return *v;
  }

  std::uint64_t global_seed() const { return u64("seed"); }
  std::size_t n_seeds() const { return has("seeds") ? count("seeds") : 1; }
  std::size_t workers() const { return count("workers"); }

  // "experiment=...\nkey=value\n..." in key order, volatile keys excluded.
  std::string canonical() const {
    std::string s = std::string("experiment=") + experiment_name(experiment_) + "\n";
    for (const auto& [k, v] : values_)
      if (!is_volatile_key(k)) s += k + "=" + v.text + "\n";
    return s;
  }
  std::uint64_t hash() const { return fnv1a64(canonical()); }
  std::string hash_hex() const {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
  }

  std::string echo() const {
    std::ostringstream os;
    os << "experiment = " << experiment_name(experiment_) << "\n";
    for (const auto& [k, v] : values_) os << k << " = " << v.text << "  [" << v.source << "]\n";
    os << "config_hash = " << hash_hex() << "\n";
    return os.str();
  }

 private:
  Experiment experiment_ = Experiment::toy_table1;
  std::map<std::string, ConfigValue> values_;
};

class ConfigBuilder {
 public:
  explicit ConfigBuilder(Experiment e) : experiment_(e), keys_(experiment_keys(e)) {}

  // Layer 0 is the config file, layer 1 the command line.
  void set(const std::string& key, const std::string& raw, const std::string& source, int layer) {
    const std::string value = detail::trim(raw);
    if (key == "experiment") {
      const auto named = experiment_from_name(value);
      if (!named || *named != experiment_)
        throw ConfigError("conflicting values for 'experiment': '" + value + "' (" + source + ") vs '" +
                          subcommand_name(experiment_) + "' (subcommand)");
      return;
    }
    const KeySpec& spec = lookup(key, source);
    check_value(spec, value, source);
    auto& slot = layers_[layer][key];
    if (slot && slot->text != value)
      throw ConfigError("conflicting values for '" + key + "': '" + slot->text + "' (" + slot->source + ") vs '" +
                        value + "' (" + source + ")");
    if (!slot) slot = ConfigValue{value, source};
  }

  void load_stream(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const std::string where = name + " line " + std::to_string(line_no);
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
      const std::string key = detail::trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(where + ": empty key");
      set(key, line.substr(eq + 1), where, 0);
    }
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    load_stream(in, "file " + path);
  }

  ExperimentConfig resolve() const {
    std::map<std::string, ConfigValue> out;
    for (const auto& k : keys_) {
      ConfigValue v{k.default_value, "default"};
      for (int layer = 0; layer < 2; ++layer) {
        const auto it = layers_[layer].find(k.name);
        if (it != layers_[layer].end() && it->second) v = *it->second;
      }
      out[k.name] = v;
    }
    return ExperimentConfig(experiment_, std::move(out));
  }

  const std::vector<KeySpec>& keys() const noexcept { return keys_; }

 private:
  const KeySpec& lookup(const std::string& key, const std::string& source) const {
    for (const auto& k : keys_)
      if (k.name == key) return k;
    std::string message = "unknown config key '" + key + "' (" + source + ")";
    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::string suggestion;
    for (const auto& k : keys_) {
      const std::size_t d = detail::edit_distance(key, k.name);
      if (d < best) {
        best = d;
        suggestion = k.name;
      }
    }
    if (best <= std::max<std::size_t>(2, key.size() / 3)) throw ConfigError(message + "; did you mean '" + suggestion + "'?");
    for (auto other : kAllExperiments)
      for (const auto& k : experiment_keys(other))
        if (k.name == key) throw ConfigError(message + "; it belongs to '" + subcommand_name(other) + "'");
    throw ConfigError(message);
  }

  static void check_value(const KeySpec& spec, const std::string& value, const std::string& source) {
    auto fail = [&](const std::string& what) {
      throw ConfigError("invalid value '" + value + "' for '" + spec.name + "' (" + source + "): " + what);
    };
    auto bound = [](double b) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", b);
      return std::string(buf);
    };
    auto check_range = [&](double v) {
      if (v < spec.min || (spec.min_exclusive && v == spec.min))
        fail(std::string(spec.min_exclusive ? "must be > " : "must be >= ") + bound(spec.min));
      if (v > spec.max || (spec.max_exclusive && v == spec.max))
        fail(std::string(spec.max_exclusive ? "must be < " : "must be <= ") + bound(spec.max));
    };
    switch (spec.type) {
      case ValueType::unsigned_int: {
        std::uint64_t v = 0;
        if (!detail::parse_u64(value, v)) fail("expected an unsigned integer");
        check_range(static_cast<double>(v));
        break;
      }
      case ValueType::real: {
        double v = 0.0;
        if (!detail::parse_real(value, v)) fail("expected a number");
        check_range(v);
        break;
      }
      case ValueType::count_list: {
        const auto v = detail::parse_count_list(value);
        if (!v) fail("expected a list such as 1..250 or 1,2,4");
        for (auto x : *v)
          if (x < 1) fail("list entries must be >= 1");
        break;
      }
      case ValueType::choice:
        if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
          std::string all;
          for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
          fail("expected one of " + all);
        }
        break;
      case ValueType::text:
        break;
    }
  }

  Experiment experiment_;
  std::vector<KeySpec> keys_;
  std::map<std::string, std::optional<ConfigValue>> layers_[2];
};

}  // namespace ionboost
