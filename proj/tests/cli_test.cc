#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cscorr/json_io.h"

namespace cscorr {
namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult RunCli(const std::string& args) {
  const std::string cmd =
      std::string(CSCORR_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, TheoryProbabilities) {
  const RunResult r =
      RunCli("theory probs --n 128 --m 115 --sx 8 --sf 11 --eps 0.01 --ctilde 0.05");
  ASSERT_EQ(r.exit_code, 0);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["P_du"][0].get<double>(), 0.99);
}

TEST(Cli, GenerateThenSolve) {
  const std::string path = ::testing::TempDir() + "cli_instance.json";
  ASSERT_EQ(RunCli("gen --m 40 --n 50 --sx 3 --sf 2 --normalize --seed 5 --out " +
                path)
                .exit_code,
            0);
  const RunResult r = RunCli("solve --mode thm21 --in " + path);
  ASSERT_EQ(r.exit_code, 0);
  const Json j = Json::parse(r.out);
  ASSERT_TRUE(j.contains("relative_error"));
  EXPECT_LT(j["relative_error"].get<double>(), 1e-8);
  std::remove(path.c_str());
}

TEST(Cli, ExperimentIsByteReproducible) {
  const std::string dir = ::testing::TempDir();
  const std::string grid = dir + "cli_grid.json";
  std::ofstream(grid) << R"({"n_values":[32],"theta_m_values":[0.5,1.0],)"
                      << R"("theta_f_values":[0.1,0.2],"trials":2,"master_seed":9})";
  ASSERT_EQ(RunCli("experiment --grid " + grid + " --out " + dir + "h1.csv").exit_code, 0);
  ASSERT_EQ(RunCli("experiment --grid " + grid + " --workers 2 --out " + dir +
                "h2.csv")
                .exit_code,
            0);
  const std::string a = ReadAll(dir + "h1.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, ReadAll(dir + "h2.csv"));
  std::remove(grid.c_str());
  std::remove((dir + "h1.csv").c_str());
  std::remove((dir + "h2.csv").c_str());
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(RunCli("solve").exit_code, 2);
  EXPECT_EQ(RunCli("gen --m 4 --n 4 --sx 1 --sf 1 --bogus 3 --seed 1").exit_code, 2);
  EXPECT_EQ(RunCli("gen --m 4 --n 4 --sx 1 --sf 1").exit_code, 2);
  EXPECT_EQ(RunCli("diagnose tail").exit_code, 2);
  EXPECT_EQ(RunCli("gen --m 4 --n 4 --sx 9 --sf 1 --seed 1").exit_code, 1);
  EXPECT_EQ(RunCli("solve --in /nonexistent.json").exit_code, 1);
  EXPECT_EQ(RunCli("--help").exit_code, 0);
}

TEST(Cli, HelpListsDefaults) {
  const RunResult r = RunCli("experiment --help");
  EXPECT_NE(r.out.find("--workers"), std::string::npos);
  EXPECT_NE(r.out.find("[1]"), std::string::npos);
  const RunResult s = RunCli("solve --help");
  EXPECT_NE(s.out.find("1e-12"), std::string::npos);
  EXPECT_NE(s.out.find("1.8"), std::string::npos);
}

}  // namespace
}  // namespace cscorr
