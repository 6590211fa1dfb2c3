#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "gaslab/families.hpp"
#include "gaslab/solver.hpp"

using namespace gaslab;

namespace {

const GasParams gas;

SolveConfig quick(double T = 1.0)
{
  SolveConfig c;
  c.T = T;
  c.keep_states = false;
  return c;
}

double final_exact_error(int n, int N, double dt, double T = 1.0)
{
  const FamilyParams f{1, n, 3.0};
  const TorusGrid grid(N);
  SolveConfig cfg = quick(T);
  cfg.dt_fixed = dt;
  double err = 0.0;
  evolve(exact_solution(f, gas, grid, 0.0), gas, cfg,
         [&](double t, const State &s) { err = state_norm(s - exact_solution(f, gas, grid, t), 3.0); });
  return err;
}

} // namespace

TEST(SolveConfig, Validation)
{
  SolveConfig c;
  EXPECT_NO_THROW(c.validate());
  c.cfl = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SolveConfig{};
  c.T = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SolveConfig{};
  c.dt_fixed = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(CflDt, Formula)
{
  const State s64 = State::constant(TorusGrid(64), {1, 0, 0, 1});
  EXPECT_NEAR(cfl_dt(s64, gas, 0.5), 0.5 * (2 * std::numbers::pi / 64) / std::sqrt(1.4), 1e-16);
  const State s128 = State::constant(TorusGrid(128), {1, 0, 0, 1});
  EXPECT_NEAR(cfl_dt(s128, gas, 0.5), 0.5 * cfl_dt(s64, gas, 0.5), 1e-16);
  EXPECT_THROW(cfl_dt(s64, gas, 0.0), std::invalid_argument);
  EXPECT_THROW(cfl_dt(s64, gas, 1.5), std::invalid_argument);
}

TEST(StepRk4, ConstantStateIsFixed)
{
  const State s = State::constant(TorusGrid(32), {1.3, 0.2, -0.4, 0.8});
  const State next = step_rk4(s, 0.05, gas);
  EXPECT_LT(state_max_diff(s, next), 1e-15);
  EXPECT_THROW(step_rk4(s, 0.0, gas), std::invalid_argument);
}

TEST(StepRk4, LocalErrorIsFifthOrder)
{
  const FamilyParams f{1, 4, 3.0};
  const TorusGrid grid(32);
  const State s0 = exact_solution(f, gas, grid, 0.0);
  double prev = 0.0;
  for (double dt : {0.2, 0.1, 0.05}) {
    const double err = state_norm(step_rk4(s0, dt, gas) - exact_solution(f, gas, grid, dt), 3.0);
    if (prev > 0.0) {
      EXPECT_GT(std::log2(prev / err), 4.7) << "dt=" << dt;
    }
    prev = err;
  }
}

TEST(Evolve, StationaryOverThousandSteps)
{
  const State s = State::constant(TorusGrid(16), {1, 0, 0, 1});
  SolveConfig cfg;
  cfg.dt_fixed = 1e-3;
  const Trajectory traj = evolve(s, gas, cfg);
  EXPECT_EQ(traj.steps, 1000);
  for (const State &x : traj.states) ASSERT_LT(state_max_diff(x, s), 1e-14);
}

TEST(Evolve, RecordingSchedule)
{
  const State s = State::constant(TorusGrid(16), {1, 0.1, 0, 1});
  SolveConfig cfg;
  cfg.T = 1.0;
  cfg.dt_fixed = 0.3; // rounded down to 0.25
  cfg.record_stride = 3;
  const Trajectory traj = evolve(s, gas, cfg);
  EXPECT_EQ(traj.steps, 4);
  EXPECT_DOUBLE_EQ(traj.dt, 0.25);
  ASSERT_EQ(traj.times.size(), 3u);
  EXPECT_EQ(traj.times[0], 0.0);
  EXPECT_DOUBLE_EQ(traj.times[1], 0.75);
  EXPECT_EQ(traj.times[2], 1.0);
  EXPECT_EQ(traj.states.size(), traj.times.size());
  EXPECT_EQ(traj.norms.size(), traj.times.size());
  for (std::size_t k = 1; k < traj.times.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
}

TEST(Evolve, ExactFamilyAtDefaultResolution)
{
  const FamilyParams f{1, 8, 3.0};
  const TorusGrid grid(64);
  SolveConfig cfg = quick();
  double worst = 0.0, div = 0.0;
  evolve(exact_solution(f, gas, grid, 0.0), gas, cfg, [&](double t, const State &s) {
    worst = std::max(worst, state_norm(s - exact_solution(f, gas, grid, t), 3.0));
    div = std::max(div, divergence(s).max_abs());
  });
  EXPECT_LE(worst, 1e-8);
  EXPECT_LE(div, 1e-10);
}

TEST(Evolve, FourthOrderUnderStepHalving)
{
  const double e1 = final_exact_error(4, 32, 0.05), e2 = final_exact_error(4, 32, 0.025);
  EXPECT_GE(std::log2(e1 / e2), 3.8);
}

TEST(Evolve, SpatialResolutionIsExactForBandLimitedSolution)
{
  const FamilyParams f{1, 4, 3.0};
  SolveConfig cfg;
  cfg.dt_fixed = 0.02;
  const TorusGrid coarse(32), fine(64);
  const State a = evolve(exact_solution(f, gas, coarse, 0.0), gas, cfg).states.back();
  const State b = evolve(exact_solution(f, gas, fine, 0.0), gas, cfg).states.back();
  const State a_up{resample(a[0], fine), resample(a[1], fine), resample(a[2], fine), resample(a[3], fine)};
  EXPECT_LE(state_norm(a_up - b, 3.0), 1e-10);
}

TEST(Evolve, MeanDensityConserved)
{
  const FamilyParams f{1, 2, 3.0};
  const TorusGrid grid(32);
  // A state with genuine density variation.
  const State s0{synthesize(grid, {Mode{0, 0, 1.0}, Mode{1, 2, 0.1}}), approx_solution(f, gas, grid, 0).u(),
                 approx_solution(f, gas, grid, 0).v(), synthesize(grid, {Mode{0, 0, 1.0}, Mode{2, 1, 0.05, ModeKind::sin}})};
  SolveConfig cfg = quick();
  double drift = 0.0;
  evolve(s0, gas, cfg, [&](double, const State &s) { drift = std::max(drift, std::abs(s.rho().mean() - 1.0)); });
  EXPECT_LE(drift, 1e-12);
}

TEST(Evolve, ApproximateFamilyStaysInStateSpace)
{
  for (int omega : {1, -1})
    for (int n : {2, 4, 8}) {
      const TorusGrid grid(8 * n);
      const Trajectory traj = evolve(initial_data({omega, n, 3.0}, gas, grid), gas, quick());
      for (const NormRecord &r : traj.norms) {
        EXPECT_GE(r.min_rho, 0.5);
        EXPECT_GE(r.min_h, 0.5);
      }
    }
}

TEST(Evolve, FilterAndDealiasFlagsRun)
{
  const TorusGrid grid(32);
  SolveConfig cfg = quick(0.2);
  cfg.spectral_filter = true;
  const Trajectory a = evolve(initial_data({1, 4, 3.0}, gas, grid), gas, cfg);
  cfg.spectral_filter = false;
  cfg.dealias_enabled = false;
  const Trajectory b = evolve(initial_data({1, 4, 3.0}, gas, grid), gas, cfg);
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_NEAR(a.norms.back().norms[1], b.norms.back().norms[1], 1e-6);
}

TEST(Evolve, AbortsWhenLeavingStateSpace)
{
  const TorusGrid grid(16);
  // Strong compression drives h negative quickly.
  const State s{Field::constant(grid, 1.0), synthesize(grid, {Mode{1, 0, 3.0, ModeKind::sin}}), Field(grid),
                Field::constant(grid, 0.05)};
  SolveConfig cfg;
  cfg.T = 5.0;
  cfg.dt_fixed = 0.01;
  try {
    evolve(s, gas, cfg);
    FAIL() << "expected SolverAbort";
  } catch (const SolverAbort &e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LT(e.time(), 5.0);
  }
  EXPECT_THROW(evolve(State::constant(grid, {1, 0, 0, 0}), gas, cfg), StateSpaceError);
}

TEST(Output, TrajectoryCsvAndSnapshot)
{
  const TorusGrid grid(16);
  SolveConfig cfg;
  cfg.T = 0.1;
  const Trajectory traj = evolve(initial_data({1, 2, 3.0}, gas, grid), gas, cfg);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,rho_tilde_norm,u_norm,v_norm,h_tilde_norm,min_rho,min_h");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), traj.times.size() + 1);
  const auto j = state_snapshot_json(traj.times.back(), traj.states.back());
  EXPECT_TRUE(j.contains("fields"));
  const Field u = field_from_spectrum_json(j["fields"]["u"]);
  EXPECT_LT((u - traj.states.back().u()).max_abs(), 1e-13);
}
