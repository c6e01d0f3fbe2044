// Drives the steklov-lab executable end to end.

#include "steklov/lab.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "steklov_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / name;
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " STEKLOV_LAB_BINARY " " + args + " > " + (work_dir() / "stdout.txt").string() +
                          " 2> " + (work_dir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kTiny =
    "alpha = 2\n"
    "eps = 1/4, 1/8\n"
    "ny = 6\n"
    "grading = 0.8\n";

}  // namespace

TEST(Cli, RunsAnExperimentAndWritesReports) {
  const fs::path cfg = write_config("tiny.cfg", kTiny);
  const fs::path out = work_dir() / "out";
  const int code = run("trichotomy --config " + cfg.string() + " --out " + out.string());
  const std::string stdout_text = slurp(work_dir() / "stdout.txt");
  ASSERT_TRUE(code == 0 || code == 1) << slurp(work_dir() / "stderr.txt");
  // Exit status mirrors the overall verdict.
  EXPECT_EQ(code == 0, stdout_text.find("overall: Satisfied") != std::string::npos);
  EXPECT_TRUE(fs::exists(out / "trichotomy_lambda.csv"));
  EXPECT_TRUE(fs::exists(out / "trichotomy_lambda.svg"));
  EXPECT_TRUE(fs::exists(out / "trichotomy_summary.txt"));
  const auto rows = steklov::lab::parse_csv(slurp(out / "trichotomy_lambda.csv"));
  EXPECT_EQ(rows.size(), 2u);

  // Same config through the environment thread count: byte-identical CSV.
  const fs::path out2 = work_dir() / "out2";
  EXPECT_EQ(run("trichotomy --config " + cfg.string() + " --out " + out2.string(), "STEKLOV_LAB_THREADS=2"), code);
  EXPECT_EQ(slurp(out / "trichotomy_lambda.csv"), slurp(out2 / "trichotomy_lambda.csv"));
  EXPECT_NE(slurp(work_dir() / "stdout.txt").find("2 threads"), std::string::npos);
}

TEST(Cli, ThreadFlagOverridesEnvironment) {
  const fs::path cfg = write_config("tiny2.cfg", kTiny);
  const int code = run("trichotomy --threads 1 --config " + cfg.string() + " --out " + (work_dir() / "o3").string(),
                       "STEKLOV_LAB_THREADS=bogus");
  EXPECT_TRUE(code == 0 || code == 1);
  EXPECT_NE(slurp(work_dir() / "stdout.txt").find("1 thread"), std::string::npos);
  EXPECT_EQ(run("trichotomy --config " + cfg.string(), "STEKLOV_LAB_THREADS=bogus"), 2);
}

TEST(Cli, ErrorsExitWithTwo) {
  EXPECT_EQ(run("trichotomy --config " + (work_dir() / "missing.cfg").string()), 2);
  const fs::path bad = write_config("bad.cfg", "eps = 1/16, 1/8\n");
  EXPECT_EQ(run("trichotomy --config " + bad.string()), 2);
  EXPECT_NE(slurp(work_dir() / "stderr.txt").find("decreasing"), std::string::npos);
  const fs::path other = write_config("other.cfg", "experiment = degeneration\n");
  EXPECT_EQ(run("trichotomy --config " + other.string()), 2);
  const fs::path refused = write_config("refused.cfg", "alpha = 1.5\neps = 1/4, 1/8, 1/16\nny = 6\n");
  EXPECT_EQ(run("dbs_convergence --config " + refused.string()), 2);
  EXPECT_NE(slurp(work_dir() / "stderr.txt").find("refused"), std::string::npos);
}

TEST(Cli, RejectsBadArguments) {
  EXPECT_NE(run("trichotomy"), 0);                      // --config is required
  EXPECT_NE(run("sweep --config x.cfg"), 0);            // unknown experiment
  EXPECT_NE(run("trichotomy --config x.cfg --threads 0"), 0);
}
