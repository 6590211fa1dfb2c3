#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaslab/euler.hpp"
#include "gaslab/field_io.hpp"

namespace gaslab {

struct SolveConfig {
  double T = 1.0;
  double cfl = 0.25;
  std::optional<double> dt_fixed;
  int record_stride = 1;
  bool dealias_enabled = true;
  /// Exponential filter exp(-36 (|k|/kmax)^36) after each step; off by default.
  bool spectral_filter = false;
  /// Keep full States in the trajectory; otherwise only norm records.
  bool keep_states = true;
  /// Sobolev index of the per-record norm diagnostics.
  double norm_sigma = 3.0;
  /// Minimum admissible rho and h.
  double floor = 1e-8;

  void validate() const
  {
    if (!(T > 0.0)) throw std::invalid_argument("SolveConfig: T must be positive");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("SolveConfig: cfl must lie in (0, 1]");
    if (dt_fixed && !(*dt_fixed > 0.0)) throw std::invalid_argument("SolveConfig: dt_fixed must be positive");
    if (record_stride < 1) throw std::invalid_argument("SolveConfig: record_stride must be >= 1");
  }
};

/// Diagnostics of one recorded time: H^sigma norms of U - (rho0, 0, 0, h0)
/// per component and the minima of rho and h.
struct NormRecord {
  double t = 0.0;
  std::array<double, 4> norms{};
  double min_rho = 0.0;
  double min_h = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<NormRecord> norms;
  double dt = 0.0;
  int steps = 0;
};

/// Thrown by evolve when a step fails; carries the time of failure.
class SolverAbort : public std::runtime_error {
public:
  SolverAbort(double t, int step, const std::string &what)
      : std::runtime_error("solver aborted at t=" + std::to_string(t) + " (step " +
                           std::to_string(step) + "): " + what),
        t_(t)
  {
  }
  double time() const { return t_; }

private:
  double t_;
};

/// cfl * dx / max_wave_speed with dx = 2pi/N.
inline double cfl_dt(const State &s, const GasParams &g, double cfl)
{
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl_dt: cfl must lie in (0, 1]");
  check_state_space(s, 0.0);
  return cfl * s.grid().spacing() / max_wave_speed(s, g);
}

namespace detail {

/// Classical RK4 on perturbation coefficients with a reusable kernel.
class Stepper {
public:
  Stepper(const TorusGrid &grid, const GasParams &g, bool dealias_enabled, bool filter,
          double floor)
      : kernel_(grid, g, RhsOptions{dealias_enabled, floor}), dealias_(dealias_enabled),
        filter_(filter)
  {
    for (auto *s : {&k1_, &k2_, &k3_, &k4_, &tmp_})
      for (auto &c : *s) c.resize(grid.coefficient_count());
  }

  void step(SpectralState &y, double dt)
  {
    const std::size_t m = y[0].size();
    kernel_(y, k1_);
    axpy(y, 0.5 * dt, k1_);
    kernel_(tmp_, k2_);
    axpy(y, 0.5 * dt, k2_);
    kernel_(tmp_, k3_);
    axpy(y, dt, k3_);
    kernel_(tmp_, k4_);
    const double w = dt / 6.0;
    for (int c = 0; c < 4; ++c)
      for (std::size_t k = 0; k < m; ++k)
        y[c][k] += w * (k1_[c][k] + 2.0 * k2_[c][k] + 2.0 * k3_[c][k] + k4_[c][k]);
    for (int c = 0; c < 4; ++c) {
      if (dealias_) apply_dealias(kernel_.grid(), y[c]);
      if (filter_) apply_exponential_filter(kernel_.grid(), y[c], 36.0, 36.0);
    }
  }

private:
  void axpy(const SpectralState &y, double a, const SpectralState &k)
  {
    for (int c = 0; c < 4; ++c)
      for (std::size_t i = 0; i < y[c].size(); ++i) tmp_[c][i] = y[c][i] + a * k[c][i];
  }

  RhsKernel kernel_;
  bool dealias_;
  bool filter_;
  SpectralState k1_, k2_, k3_, k4_, tmp_;
};

inline NormRecord make_record(double t, const State &s, const GasParams &g, double sigma)
{
  return {t, component_norms(perturbation(s, g), sigma), s.rho().min(), s.h().min()};
}

} // namespace detail

/// One classical Runge-Kutta step of size dt. Throws StateSpaceError when any
/// stage leaves the state space.
inline State step_rk4(const State &s, double dt, const GasParams &g, bool dealias_enabled = true)
{
  if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be positive");
  detail::Stepper stepper(s.grid(), g, dealias_enabled, false, 1e-8);
  auto y = detail::to_spectral(s, g);
  stepper.step(y, dt);
  return detail::from_spectral(s.grid(), y, g);
}

using Observer = std::function<void(double t, const State &)>;

/// Integrates from s0 to cfg.T with a fixed step chosen once from the initial
/// CFL condition (or cfg.dt_fixed), rounded down so T is hit exactly.
/// Records time 0, every record_stride-th step and the final step.
inline Trajectory evolve(const State &s0, const GasParams &g, const SolveConfig &cfg,
                         const Observer &observer = {})
{
  cfg.validate();
  g.validate();
  check_state_space(s0, cfg.floor);
  const double dt_target = cfg.dt_fixed ? *cfg.dt_fixed : cfl_dt(s0, g, cfg.cfl);
  const int steps = std::max(1, static_cast<int>(std::ceil(cfg.T / dt_target - 1e-9)));

  Trajectory traj;
  traj.dt = cfg.T / steps;
  traj.steps = steps;

  auto record = [&](double t, const State &s) {
    traj.times.push_back(t);
    traj.norms.push_back(detail::make_record(t, s, g, cfg.norm_sigma));
    if (observer) observer(t, s);
    if (cfg.keep_states) traj.states.push_back(s);
  };

  record(0.0, s0);
  detail::Stepper stepper(s0.grid(), g, cfg.dealias_enabled, cfg.spectral_filter, cfg.floor);
  auto y = detail::to_spectral(s0, g);
  for (int k = 1; k <= steps; ++k) {
    try {
      stepper.step(y, traj.dt);
    } catch (const std::exception &e) {
      throw SolverAbort((k - 1) * traj.dt, k, e.what());
    }
    if (k % cfg.record_stride == 0 || k == steps) {
      const double t = k == steps ? cfg.T : k * traj.dt;
      State s = detail::from_spectral(s0.grid(), y, g);
      try {
        check_state_space(s, cfg.floor);
      } catch (const std::exception &e) {
        throw SolverAbort(t, k, e.what());
      }
      record(t, s);
    }
  }
  return traj;
}

/// CSV with header t,rho_tilde_norm,u_norm,v_norm,h_tilde_norm,min_rho,min_h.
inline void write_trajectory_csv(std::ostream &os, const Trajectory &traj)
{
  os << "t,rho_tilde_norm,u_norm,v_norm,h_tilde_norm,min_rho,min_h\n" << std::setprecision(17);
  for (const auto &r : traj.norms) {
    os << r.t;
    for (double n : r.norms) os << ',' << n;
    os << ',' << r.min_rho << ',' << r.min_h << '\n';
  }
}

inline nlohmann::json state_snapshot_json(double t, const State &s, double threshold = 1e-14)
{
  nlohmann::json fields;
  for (int c = 0; c < 4; ++c) fields[State::names[c]] = field_spectrum_json(s[c], threshold);
  return {{"t", t}, {"fields", std::move(fields)}};
}

} // namespace gaslab
