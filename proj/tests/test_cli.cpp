#include <gtest/gtest.h>

#include <unistd.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Invocation {
  int status = -1;
  std::string output;
};

Invocation run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / ("ionboost_cli_log_" + std::to_string(::getpid()));
  const std::string cmd = std::string(IONBOOST_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  Invocation inv;
  inv.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  inv.output = ss.str();
  fs::remove(log);
  return inv;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("ionboost_cli_" + std::to_string(::getpid()));
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  fs::path root_;
};

}  // namespace

TEST_F(CliTest, SmallRunsAreByteIdenticalAcrossWorkerCounts) {
  const std::pair<const char*, const char*> runs[] = {
      {"toy", "--seeds 2 --n 80 --mc-samples 9000 --n-steps 5"},
      {"sweep-m", "--seeds 2 --n 80 --mc-samples 9000 --m-list 1..6"},
      {"sweep-depth", "--seeds 2 --n 80 --mc-samples 9000 --depth-list 1,3 --n-steps 4"},
      {"xor", "--n-trees 4"},
      {"comono", "--n-ensembles 4 --n-points 50"},
      {"plateau", "--n 100 --mc-samples 9000 --n-steps 8"},
      {"backtest", "--months 8 --stocks 30 --factors 4 --cutoff 5 --depth-list 1,2 --steps-list 2,4 "
                   "--strategy-steps 4 --strategy-depth 2 --n-long 5 --n-short 5"},
      {"synth-panel", "--months 3 --stocks 10 --factors 4"},
  };
  for (const auto& [sub, args] : runs) {
    const fs::path a = root_ / (std::string(sub) + "_w1"), b = root_ / (std::string(sub) + "_w3");
    const Invocation ra = run_cli(std::string(sub) + " " + args + " --workers 1 --out " + a.string());
    const Invocation rb = run_cli(std::string(sub) + " " + args + " --workers 3 --out " + b.string());
    ASSERT_EQ(ra.status, 0) << sub << "\n" << ra.output;
    ASSERT_EQ(rb.status, 0) << sub << "\n" << rb.output;
    EXPECT_NE(ra.output.find("# resolved config"), std::string::npos);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const fs::path other = b / entry.path().filename();
      ASSERT_TRUE(fs::exists(other)) << other;
      const std::string bytes = slurp(entry.path());
      EXPECT_EQ(bytes, slurp(other)) << sub << " " << entry.path().filename();
      EXPECT_EQ(bytes.rfind("# ionboost ", 0), 0u) << entry.path();
      ++files;
    }
    EXPECT_GT(files, 0u) << sub;
  }
}

TEST_F(CliTest, ToyTableShape) {
  const fs::path out = root_ / "toy";
  ASSERT_EQ(run_cli("toy --seeds 2 --n 60 --mc-samples 9000 --n-steps 3 --out " + out.string()).status, 0);
  std::istringstream table(slurp(out / "table1.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(table, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[1], "method,ion,training_error,test_error,seeds");
  EXPECT_EQ(lines[2].rfind("bayes,,", 0), 0u) << lines[2];
  EXPECT_EQ(lines[3].rfind("1nn,", 0), 0u);
  EXPECT_EQ(lines[4].rfind("adaboost(", 0), 0u);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  const fs::path cfg = root_ / "toy.cfg";
  std::ofstream(cfg) << "# small toy run\nn = 500\nseeds = 1\nmc_samples = 9000\nn_steps = 2\n";
  const Invocation r =
      run_cli("toy --config " + cfg.string() + " --n 50 --out " + (root_ / "prec").string());
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("n = 50  [flag --n]"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("seeds = 1  [file "), std::string::npos) << r.output;
}

TEST_F(CliTest, UsageErrorsExitOne) {
  const Invocation typo = run_cli("toy --max-dpeth 4 --out " + (root_ / "x").string());
  EXPECT_EQ(typo.status, 1);
  EXPECT_NE(typo.output.find("did you mean 'max_depth'"), std::string::npos) << typo.output;
  EXPECT_EQ(run_cli("toy --q abc").status, 1);
  EXPECT_EQ(run_cli("toy --n 3 --n 4").status, 1);
  EXPECT_EQ(run_cli("").status, 1);
  EXPECT_EQ(run_cli("frobnicate").status, 1);
  EXPECT_EQ(run_cli("toy --config /nonexistent.cfg").status, 1);
}

TEST_F(CliTest, MissingPanelExitsTwo) {
  const Invocation r = run_cli("backtest --panel /nonexistent/panel.csv --out " + (root_ / "bt").string());
  EXPECT_EQ(r.status, 2) << r.output;
}

TEST_F(CliTest, GeneratedPanelFeedsBacktest) {
  const fs::path p = root_ / "panel";
  ASSERT_EQ(run_cli("synth-panel --months 8 --stocks 30 --factors 4 --out " + p.string()).status, 0);
  const Invocation r = run_cli("backtest --panel " + (p / "panel.csv").string() +
                               " --cutoff 5 --depth-list 1 --steps-list 3 --strategy-steps 3 --strategy-depth 1 "
                               "--n-long 5 --n-short 5 --out " + (root_ / "bt").string());
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(fs::exists(root_ / "bt" / "auc_grid.csv"));
  EXPECT_TRUE(fs::exists(root_ / "bt" / "equity_curve.csv"));
  EXPECT_TRUE(fs::exists(root_ / "bt" / "summary.csv"));
}
