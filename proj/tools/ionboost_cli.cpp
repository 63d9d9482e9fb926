// Experiment runner. Exit status: 0 success, 1 usage or config error, 2 data error.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ionboost/ionboost.hpp"

namespace {

std::string flag_for(const std::string& key) {
  std::string f = key;
  for (auto& c : f)
    if (c == '_') c = '-';
  return "--" + f;
}

struct Subcommand {
  ionboost::Experiment experiment;
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::vector<std::string>> flags;  // key -> every value given
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AdaBoost interpolation, influence-of-noise and factor backtest experiments"};
  app.require_subcommand(1);
  std::vector<Subcommand> subs;
  subs.reserve(std::size(ionboost::kAllExperiments));
  for (auto e : ionboost::kAllExperiments) {
    Subcommand& s = subs.emplace_back();
    s.experiment = e;
    s.app = app.add_subcommand(ionboost::subcommand_name(e), std::string("run ") + ionboost::experiment_name(e));
    s.app->allow_extras();
    s.app->add_option("--config", s.config_path, "key = value file; flags override it")->check(CLI::ExistingFile);
    for (const auto& key : ionboost::experiment_keys(e)) {
      const std::string def = key.default_value.empty() ? "empty" : key.default_value;
      auto* opt = s.app->add_option(flag_for(key.name), s.flags[key.name], key.help + " (default " + def + ")");
      opt->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)->type_name("VALUE");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (auto& s : subs) {
    if (!s.app->parsed()) continue;
    try {
      ionboost::ConfigBuilder builder(s.experiment);
      if (!s.config_path.empty()) builder.load_file(s.config_path);
      for (const auto& [key, values] : s.flags)
        for (const auto& v : values) builder.set(key, v, "flag " + flag_for(key), 1);
      // Unrecognised flags go through the builder for a did-you-mean message.
      const std::vector<std::string> extra = s.app->remaining();
      for (std::size_t i = 0; i < extra.size(); ++i) {
        if (extra[i].rfind("--", 0) != 0) throw ionboost::ConfigError("unexpected argument '" + extra[i] + "'");
        const std::string flag = extra[i];
        std::string name = flag.substr(2), value;
        if (const auto eq = name.find('='); eq != std::string::npos) {
          value = name.substr(eq + 1);
          name.erase(eq);
        } else if (i + 1 < extra.size()) {
          value = extra[++i];
        }
        for (auto& c : name)
          if (c == '-') c = '_';
        builder.set(name, value, "flag " + flag, 1);
      }
      const ionboost::ExperimentConfig cfg = builder.resolve();
      std::cout << "# resolved config\n" << cfg.echo() << std::flush;
      const auto result = ionboost::run_experiment(cfg, std::cout);
      for (const auto& f : result.files) std::cout << "wrote " << f << "\n";
      return 0;
    } catch (const ionboost::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const ionboost::DataError& e) {
      std::cerr << "data error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}
