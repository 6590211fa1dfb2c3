#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaslab/euler.hpp"
#include "gaslab/field.hpp"

namespace gaslab {

/// Index (omega, n, s) of the two solution sequences.
struct FamilyParams {
  int omega = 1;
  int n = 1;
  double s = 3.0;

  void validate() const
  {
    if (omega != 1 && omega != -1) {
      throw std::invalid_argument("FamilyParams: omega must be +1 or -1");
    }
    if (n < 1) throw std::invalid_argument("FamilyParams: n must be positive");
    if (!(s > 2.0)) throw std::invalid_argument("FamilyParams: s must exceed 2");
  }
};

namespace detail {

inline void require_resolved(const TorusGrid &grid, int highest_mode, const char *what)
{
  if (highest_mode > grid.dealias_cutoff()) {
    throw std::invalid_argument(std::string(what) + ": mode " + std::to_string(highest_mode) +
                                " exceeds N/3 on N=" + std::to_string(grid.size()));
  }
}

} // namespace detail

// Constant-density exact solutions:
//   (rho0, n^-s cos(ny - omega t), omega/n, h0).

inline State exact_solution(const FamilyParams &f, const GasParams &g, const TorusGrid &grid,
                            double t)
{
  f.validate();
  detail::require_resolved(grid, f.n, "exact_solution");
  const double amp = std::pow(f.n, -f.s);
  return {Field::constant(grid, g.rho0),
          synthesize(grid, {Mode{0, f.n, amp, ModeKind::cos, -f.omega * t}}),
          Field::constant(grid, static_cast<double>(f.omega) / f.n), Field::constant(grid, g.h0)};
}

/// d/dt of exact_solution; only the u-component moves.
inline State exact_time_derivative(const FamilyParams &f, const GasParams &g,
                                   const TorusGrid &grid, double t)
{
  f.validate();
  detail::require_resolved(grid, f.n, "exact_time_derivative");
  const double amp = f.omega * std::pow(f.n, -f.s);
  (void)g;
  return {Field(grid), synthesize(grid, {Mode{0, f.n, amp, ModeKind::sin, -f.omega * t}}),
          Field(grid), Field(grid)};
}

// Approximate solutions
//   rho = rho0
//   u   = omega/n + n^-s cos(ny - omega t)
//   v   = omega/n + n^-s cos(nx - omega t)
//   h   = h0 + n^-2s sin(nx - omega t) sin(ny - omega t)
// The h product is expanded as (cos(nx - ny) - cos(nx + ny - 2 omega t)) / 2.

inline State approx_solution(const FamilyParams &f, const GasParams &g, const TorusGrid &grid,
                             double t)
{
  f.validate();
  detail::require_resolved(grid, 2 * f.n, "approx_solution");
  const int n = f.n;
  const double wt = f.omega * t;
  const double drift = static_cast<double>(f.omega) / n;
  const double a = std::pow(n, -f.s);
  const double b = std::pow(n, -2.0 * f.s);
  return {Field::constant(grid, g.rho0),
          synthesize(grid, {Mode{0, 0, drift}, Mode{0, n, a, ModeKind::cos, -wt}}),
          synthesize(grid, {Mode{0, 0, drift}, Mode{n, 0, a, ModeKind::cos, -wt}}),
          synthesize(grid, {Mode{0, 0, g.h0}, Mode{n, -n, 0.5 * b, ModeKind::cos, 0.0},
                            Mode{n, n, -0.5 * b, ModeKind::cos, -2.0 * wt}})};
}

inline State approx_time_derivative(const FamilyParams &f, const GasParams &g,
                                    const TorusGrid &grid, double t)
{
  f.validate();
  detail::require_resolved(grid, 2 * f.n, "approx_time_derivative");
  (void)g;
  const int n = f.n;
  const double wt = f.omega * t;
  const double a = f.omega * std::pow(n, -f.s);
  const double b = f.omega * std::pow(n, -2.0 * f.s);
  return {Field(grid), synthesize(grid, {Mode{0, n, a, ModeKind::sin, -wt}}),
          synthesize(grid, {Mode{n, 0, a, ModeKind::sin, -wt}}),
          synthesize(grid, {Mode{n, n, -b, ModeKind::sin, -2.0 * wt}})};
}

/// The t = 0 approximate state, which is also the data of the actual solution.
inline State initial_data(const FamilyParams &f, const GasParams &g, const TorusGrid &grid)
{
  return approx_solution(f, g, grid, 0.0);
}

/// Residue of the approximate family in the h-equation:
///   n^(1-3s) cos a cos b (sin a + sin b),  a = nx - omega t, b = ny - omega t,
/// built from its four-sine expansion.
inline Field residue_field(const FamilyParams &f, const TorusGrid &grid, double t)
{
  f.validate();
  detail::require_resolved(grid, 2 * f.n, "residue_field");
  const int n = f.n;
  const double wt = f.omega * t;
  const double q = 0.25 * std::pow(n, 1.0 - 3.0 * f.s);
  return synthesize(grid, {Mode{2 * n, n, q, ModeKind::sin, -3.0 * wt},
                           Mode{2 * n, -n, q, ModeKind::sin, -wt},
                           Mode{n, 2 * n, q, ModeKind::sin, -3.0 * wt},
                           Mode{n, -2 * n, -q, ModeKind::sin, wt}});
}

/// Pointwise residue, product form.
inline double residue_value(const FamilyParams &f, double x, double y, double t)
{
  const double a = f.n * x - f.omega * t, b = f.n * y - f.omega * t;
  return std::pow(f.n, 1.0 - 3.0 * f.s) * std::cos(a) * std::cos(b) * (std::sin(a) + std::sin(b));
}

/// Pointwise residue, double-angle form.
inline double residue_value_double_angle(const FamilyParams &f, double x, double y, double t)
{
  const double a = f.n * x - f.omega * t, b = f.n * y - f.omega * t;
  return 0.5 * std::pow(f.n, 1.0 - 3.0 * f.s) *
         (std::sin(2 * a) * std::cos(b) + std::cos(a) * std::sin(2 * b));
}

/// Constant-free envelope n^(2 sigma - 3s + 1) for the H^sigma residue norm,
/// valid for 1 < sigma <= s - 1, s > 2, n >= 2.
inline double residue_norm_bound(const FamilyParams &f, double sigma)
{
  f.validate();
  if (!(sigma > 1.0 && sigma <= f.s - 1.0)) {
    throw std::invalid_argument("residue_norm_bound: need 1 < sigma <= s - 1");
  }
  if (f.n < 2) throw std::invalid_argument("residue_norm_bound: need n >= 2");
  return std::pow(f.n, 2.0 * sigma - 3.0 * f.s + 1.0);
}

/// Closed form of approx_solution(+1) - approx_solution(-1):
///   (0, 2/n + 2 n^-s sin(ny) sin t, 2/n + 2 n^-s sin(nx) sin t, -n^-2s sin(nx + ny) sin 2t).
inline State approx_difference(int n, double s, const TorusGrid &grid, double t)
{
  FamilyParams{1, n, s}.validate();
  detail::require_resolved(grid, 2 * n, "approx_difference");
  const double c = 2.0 / n;
  const double a = 2.0 * std::pow(n, -s) * std::sin(t);
  const double b = -std::pow(n, -2.0 * s) * std::sin(2.0 * t);
  return {Field(grid), synthesize(grid, {Mode{0, 0, c}, Mode{0, n, a, ModeKind::sin}}),
          synthesize(grid, {Mode{0, 0, c}, Mode{n, 0, a, ModeKind::sin}}),
          synthesize(grid, {Mode{n, n, b, ModeKind::sin}})};
}

} // namespace gaslab
