#include <sstream>

#include <gtest/gtest.h>

#include "eerelay/experiments.hpp"
#include "helpers.hpp"

using namespace eerelay;

TEST(Aggregate, Examples) {
  auto a = aggregate({5.0});
  EXPECT_EQ(a.mean, 5.0);
  EXPECT_EQ(a.stderr_, 0.0);
  a = aggregate({1.0, 1.0, 1.0, 1.0});
  EXPECT_EQ(a.mean, 1.0);
  EXPECT_EQ(a.stderr_, 0.0);
  a = aggregate({0.0, 2.0});
  EXPECT_DOUBLE_EQ(a.mean, 1.0);
  EXPECT_DOUBLE_EQ(a.stderr_, 1.0);
  EXPECT_THROW(aggregate({}), EmptyInput);
}

TEST(Scenarios, Builtins) {
  const SweepSpec r = builtin_scenario("radius");
  bool found = false;
  for (const auto& ax : r.axes)
    if (ax.name == "cell_radius_km") {
      found = true;
      EXPECT_EQ(ax.values, (std::vector<double>{0.75, 1, 1.25, 1.5, 1.75, 2}));
    }
  EXPECT_TRUE(found);

  const SweepSpec d = builtin_scenario("d_r");
  found = false;
  for (const auto& ax : d.axes)
    if (ax.name == "d_r") {
      found = true;
      EXPECT_EQ(ax.values, (std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9}));
    }
  EXPECT_TRUE(found);

  const SweepSpec u = builtin_scenario("users");
  EXPECT_EQ(u.base.radio.n_relays, 3);
  EXPECT_EQ(u.base.geometry.d_r, 0.5);
  EXPECT_EQ(u.base.geometry.cell_radius_km, 1.5);

  EXPECT_THROW(builtin_scenario("nope"), ConfigError);
  for (const auto& s : builtin_scenarios()) EXPECT_NO_THROW(s.validate()) << s.name;
}

TEST(Sweep, SingleSampleEqualsSolution) {
  SweepSpec s;
  s.name = "one";
  s.base = test::small_config(3, 4, 1);
  s.samples = 1;
  s.master_seed = 9;
  s.algorithms = {Algorithm::eem};
  const auto res = run_sweep(s, {1, true});
  ASSERT_EQ(res.records.size(), 1u);
  const auto chan = test::random_channel(s.base, 9);
  const Solution sol = solve_eem(chan, s.base.scenario(), s.base.solver);
  const ResultRecord& r = res.records[0];
  EXPECT_EQ(r.samples, 1);
  EXPECT_EQ(r.ee.mean, sol.metrics.ee_per_subcarrier);
  EXPECT_EQ(r.se.mean, sol.metrics.rate_per_subcarrier);
  EXPECT_EQ(r.rho.mean, sol.metrics.rho);
  EXPECT_EQ(r.ee.stderr_, 0.0);
  EXPECT_EQ(r.outer_iters.mean, sol.trace.outer_iterations());
}

TEST(Sweep, DeterministicAcrossThreads) {
  SweepSpec s;
  s.name = "det";
  s.base = test::small_config(4, 8, 2);
  s.axes = {{"p_max_dbm", {0, 20}}};
  s.samples = 12;
  std::ostringstream a, b;
  write_csv(a, run_sweep(s, {1, false}).records);
  write_csv(b, run_sweep(s, {3, false}).records);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Sweep, BudgetMonotone) {
  SweepSpec s;
  s.name = "budget";
  s.base = test::small_config(4, 8, 1);
  s.axes = {{"p_max_dbm", {-30, 60}}};
  s.samples = 10;
  s.algorithms = {Algorithm::eem};
  const auto res = run_sweep(s);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_LE(res.records[0].ee.mean, res.records[1].ee.mean);
  for (const auto& r : res.records) {
    EXPECT_GE(r.rho.mean, 0.0);
    EXPECT_LE(r.rho.mean, 1.0);
  }
}

TEST(Sweep, NoRelaysNoAf) {
  SweepSpec s;
  s.name = "m0";
  s.base = test::small_config(4, 8, 0);
  s.samples = 5;
  for (const auto& r : run_sweep(s).records) EXPECT_EQ(r.rho.mean, 0.0);
}

TEST(Sweep, RejectsBadAxis) {
  SweepSpec s;
  s.axes = {{"nonsense", {1}}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.axes = {{"d_r", {}}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.axes = {{"d_r", {1.5}}};
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Output, CsvHeader) {
  std::ostringstream out;
  write_csv(out, {});
  EXPECT_EQ(out.str(),
            "scenario,algorithm,p_max_dbm,n_users,n_subcarriers,n_relays,cell_radius_km,d_r,samples,failures,se_mean,"
            "se_stderr,ee_mean,ee_stderr,rho_mean,rho_stderr,txpower_mean,outer_iters_mean,inner_iters_mean\n");
}
