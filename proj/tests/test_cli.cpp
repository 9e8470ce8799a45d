#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(EERELAY_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

}  // namespace

TEST(Cli, SolveShape) {
  const CliRun r = run("solve --seed 7 --k 2 --n 4 --m 1");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.contains("allocation"));
  EXPECT_TRUE(j.contains("metrics"));
  EXPECT_TRUE(j.contains("trace"));
  EXPECT_EQ(j["allocation"].size(), 4u);
  EXPECT_EQ(run("solve --seed 7 --k 2 --n 4 --m 1").out, r.out);
}

TEST(Cli, SweepHeader) {
  const std::string path = ::testing::TempDir() + "eerelay_cli_r.csv";
  const CliRun r = run("sweep --scenario radius --samples 2 --out " + path);
  ASSERT_EQ(r.status, 0);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header,
            "scenario,algorithm,p_max_dbm,n_users,n_subcarriers,n_relays,cell_radius_km,d_r,samples,failures,se_mean,"
            "se_stderr,ee_mean,ee_stderr,rho_mean,rho_stderr,txpower_mean,outer_iters_mean,inner_iters_mean");
  int rows = 0;
  for (std::string line; std::getline(f, line);) ++rows;
  EXPECT_EQ(rows, 6 * 6 * 2);
  std::remove(path.c_str());
}

TEST(Cli, OracleReport) {
  const CliRun r = run("oracle --k 2 --n 2 --m 1 --seeds 3");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["instances"].size(), 3u);
  for (const auto& i : j["instances"]) EXPECT_GE(i["relative_gap"].get<double>(), -0.01);
}

TEST(Cli, ConvergenceLines) {
  const CliRun r = run("convergence --seed 2 --k 4 --n 8 --m 0");
  ASSERT_EQ(r.status, 0);
  std::istringstream in(r.out);
  int lines = 0;
  for (std::string line; std::getline(in, line); ++lines) EXPECT_TRUE(nlohmann::json::accept(line));
  EXPECT_GE(lines, 2);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").status, 1);
  EXPECT_EQ(run("frobnicate").status, 1);
  EXPECT_EQ(run("solve --set xi_bs=0.9").status, 1);
  EXPECT_EQ(run("solve --set no_such_key=1").status, 1);
  EXPECT_EQ(run("scenarios").status, 0);
  EXPECT_EQ(run("solve --k 2 --n 4 --m 1 --strict --set i_inner_max=1").status, 2);
}

TEST(Cli, FlagOverridesConfigFile) {
  const std::string path = ::testing::TempDir() + "eerelay_cli.conf";
  {
    std::ofstream f(path);
    f << "p_max_dbm = 0\nn_users = 2\nn_subcarriers = 2\nn_relays = 0\n";
  }
  const CliRun a = run("solve --config " + path + " --p-max-dbm 20");
  ASSERT_EQ(a.status, 0);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_LE(j["metrics"]["tx_power_used"].get<double>(), 0.1 * (1 + 1e-9));
  EXPECT_GT(j["metrics"]["tx_power_used"].get<double>(), 1e-3);
  const CliRun b = run("solve --config " + path + " --set n_users=3");
  ASSERT_EQ(b.status, 0);
  std::remove(path.c_str());
}
