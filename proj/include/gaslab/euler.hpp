#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaslab/field.hpp"

namespace gaslab {

/// Ratio of specific heats and the base state (rho0, 0, 0, h0).
struct GasParams {
  double gamma = 1.4;
  double rho0 = 1.0;
  double h0 = 1.0;

  void validate() const
  {
    if (!(gamma > 1.0 && gamma < 3.0)) {
      throw std::invalid_argument("GasParams: gamma must lie in (1, 3), got " + std::to_string(gamma));
    }
    if (!(rho0 > 0.0) || !(h0 > 0.0)) {
      throw std::invalid_argument("GasParams: rho0 and h0 must be positive");
    }
  }
};

/// Raised when a state leaves the region rho > 0, h > 0 where the system is
/// symmetrizable hyperbolic.
class StateSpaceError : public std::runtime_error {
public:
  StateSpaceError(std::string field, double minimum)
      : std::runtime_error("state left the hyperbolic domain: min " + field + " = " +
                           std::to_string(minimum)),
        field_(std::move(field)), minimum_(minimum)
  {
  }
  const std::string &field() const { return field_; }
  double minimum() const { return minimum_; }

private:
  std::string field_;
  double minimum_;
};

struct PointState {
  double rho = 1.0;
  double u = 0.0;
  double v = 0.0;
  double h = 1.0;
};

/// First derivatives of (rho, u, v, h) at a point.
struct PointGradient {
  double rho_x = 0.0, rho_y = 0.0;
  double u_x = 0.0, u_y = 0.0;
  double v_x = 0.0, v_y = 0.0;
  double h_x = 0.0, h_y = 0.0;
};

/// Dense 4x4 matrix acting on (rho, u, v, h). Indices are zero-based.
class CoeffMatrix {
public:
  CoeffMatrix() = default;
  CoeffMatrix(std::initializer_list<std::array<double, 4>> rows)
  {
    std::size_t r = 0;
    for (const auto &row : rows) m_[r++] = row;
  }

  double &operator()(int r, int c) { return m_[r][c]; }
  double operator()(int r, int c) const { return m_[r][c]; }

  friend CoeffMatrix operator*(const CoeffMatrix &a, const CoeffMatrix &b)
  {
    CoeffMatrix out;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += a(r, k) * b(k, c);
        out(r, c) = s;
      }
    return out;
  }

  CoeffMatrix transposed() const
  {
    CoeffMatrix out;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) out(r, c) = m_[c][r];
    return out;
  }

  double max_abs_diff(const CoeffMatrix &other) const
  {
    double d = 0.0;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) d = std::max(d, std::abs(m_[r][c] - other(r, c)));
    return d;
  }

  bool is_finite() const
  {
    for (const auto &row : m_)
      for (double x : row)
        if (!std::isfinite(x)) return false;
    return true;
  }

private:
  std::array<std::array<double, 4>, 4> m_{};
};

namespace detail {

inline void require_in_domain(const PointState &p)
{
  if (!(p.rho > 0.0)) throw StateSpaceError("rho", p.rho);
  if (!(p.h > 0.0)) throw StateSpaceError("h", p.h);
}

} // namespace detail

// U_t + A(U) U_x + B(U) U_y = 0 in the variables (rho, u, v, h).

inline CoeffMatrix matrix_A(const PointState &p, const GasParams &g)
{
  detail::require_in_domain(p);
  return {{p.u, p.rho, 0, 0},
          {p.h / p.rho, p.u, 0, 1},
          {0, 0, p.u, 0},
          {0, (g.gamma - 1) * p.h, 0, p.u}};
}

inline CoeffMatrix matrix_B(const PointState &p, const GasParams &g)
{
  detail::require_in_domain(p);
  return {{p.v, 0, p.rho, 0},
          {0, p.v, 0, 0},
          {p.h / p.rho, 0, p.v, 1},
          {0, 0, (g.gamma - 1) * p.h, p.v}};
}

/// Symmetrizer: A0 A and A0 B are symmetric, A0 is SPD on the state space.
inline CoeffMatrix matrix_A0(const PointState &p, const GasParams &g)
{
  detail::require_in_domain(p);
  return {{p.h / p.rho, 0, 0, 0},
          {0, p.rho, 0, 0},
          {0, 0, p.rho, 0},
          {0, 0, 0, p.rho / ((g.gamma - 1) * p.h)}};
}

inline CoeffMatrix matrix_A1(const PointState &p, const GasParams &g)
{
  detail::require_in_domain(p);
  return {{p.u * p.h / p.rho, p.h, 0, 0},
          {p.h, p.rho * p.u, 0, p.rho},
          {0, 0, p.rho * p.u, 0},
          {0, p.rho, 0, p.rho * p.u / ((g.gamma - 1) * p.h)}};
}

inline CoeffMatrix matrix_B1(const PointState &p, const GasParams &g)
{
  detail::require_in_domain(p);
  return {{p.v * p.h / p.rho, 0, p.h, 0},
          {0, p.rho * p.v, 0, 0},
          {p.h, 0, p.rho * p.v, p.rho},
          {0, 0, p.rho, p.rho * p.v / ((g.gamma - 1) * p.h)}};
}

/// Zeroth-order coupling matrix of the error system between an actual
/// solution (value `p`, gradient `d`) and an approximate one whose h-value at
/// the point is `h_approx`.
inline CoeffMatrix matrix_C(const PointState &p, const PointGradient &d, double h_approx,
                            const GasParams &g)
{
  detail::require_in_domain(p);
  if (!(h_approx > 0.0)) throw StateSpaceError("h_approx", h_approx);
  const double div = d.u_x + d.v_y;
  return {{div, d.rho_x, d.rho_y, 0},
          {-h_approx * d.rho_x / (p.rho * g.rho0), d.u_x, d.u_y, d.rho_x / p.rho},
          {-h_approx * d.rho_y / (p.rho * g.rho0), d.v_x, d.v_y, d.rho_y / p.rho},
          {0, d.h_x, d.h_y, (g.gamma - 1) * div}};
}

/// kappa = min{rho0, h0/(2 rho0), rho0/(2(gamma-1)h0)}, the lower bound on A0
/// near the base state.
inline double symmetrizer_kappa(const GasParams &g)
{
  return std::min({g.rho0, g.h0 / (2 * g.rho0), g.rho0 / (2 * (g.gamma - 1) * g.h0)});
}

// ---------------------------------------------------------------------------

/// The unknown U = (rho, u, v, h) on one grid.
class State {
public:
  static constexpr std::array<const char *, 4> names{"rho", "u", "v", "h"};

  State(Field rho, Field u, Field v, Field h)
      : fields_{std::move(rho), std::move(u), std::move(v), std::move(h)}
  {
    for (int c = 1; c < 4; ++c) Field::require_same_grid(fields_[0], fields_[c]);
  }

  static State constant(const TorusGrid &grid, const PointState &p)
  {
    return {Field::constant(grid, p.rho), Field::constant(grid, p.u), Field::constant(grid, p.v),
            Field::constant(grid, p.h)};
  }

  const TorusGrid &grid() const { return fields_[0].grid(); }
  const Field &rho() const { return fields_[0]; }
  const Field &u() const { return fields_[1]; }
  const Field &v() const { return fields_[2]; }
  const Field &h() const { return fields_[3]; }
  const Field &operator[](int c) const { return fields_[c]; }

  friend State operator+(const State &a, const State &b)
  {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
  }
  friend State operator-(const State &a, const State &b)
  {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
  }
  friend State operator*(double s, const State &a)
  {
    return {s * a[0], s * a[1], s * a[2], s * a[3]};
  }

private:
  std::array<Field, 4> fields_;
};

/// U - (rho0, 0, 0, h0).
inline State perturbation(const State &s, const GasParams &g)
{
  return {s.rho().plus_constant(-g.rho0), s.u(), s.v(), s.h().plus_constant(-g.h0)};
}

/// Euclidean combination of the four componentwise H^sigma norms.
inline double state_norm(const State &s, double sigma)
{
  double sum = 0.0;
  for (int c = 0; c < 4; ++c) {
    const double n = sobolev_norm(s[c], sigma);
    sum += n * n;
  }
  return std::sqrt(sum);
}

inline std::array<double, 4> component_norms(const State &s, double sigma)
{
  return {sobolev_norm(s[0], sigma), sobolev_norm(s[1], sigma), sobolev_norm(s[2], sigma),
          sobolev_norm(s[3], sigma)};
}

inline double state_max_diff(const State &a, const State &b)
{
  double m = 0.0;
  for (int c = 0; c < 4; ++c) m = std::max(m, (a[c] - b[c]).max_abs());
  return m;
}

/// Throws StateSpaceError unless min rho and min h exceed `floor`.
inline void check_state_space(const State &s, double floor = 1e-8)
{
  if (const double m = s.rho().min(); !(m > floor)) throw StateSpaceError("rho", m);
  if (const double m = s.h().min(); !(m > floor)) throw StateSpaceError("h", m);
}

inline State dealias(const State &s)
{
  return {dealias(s[0]), dealias(s[1]), dealias(s[2]), dealias(s[3])};
}

inline Field divergence(const State &s) { return partial_x(s.u()) + partial_y(s.v()); }

/// max over samples of max(|u|, |v|) + sqrt(gamma h).
inline double max_wave_speed(const State &s, const GasParams &g)
{
  const auto u = s.u().samples(), v = s.v().samples(), h = s.h().samples();
  double m = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!(h[k] > 0.0)) throw StateSpaceError("h", h[k]);
    const double c = std::sqrt(g.gamma * h[k]);
    m = std::max(m, std::max(std::abs(u[k]), std::abs(v[k])) + c);
  }
  return m;
}

// ---------------------------------------------------------------------------

struct RhsOptions {
  bool dealias = true;
  double floor = 1e-8;
};

namespace detail {

/// Coefficients of U - (rho0, 0, 0, h0), one array per component.
using SpectralState = std::array<std::vector<cplx>, 4>;

inline SpectralState to_spectral(const State &s, const GasParams &g)
{
  SpectralState out;
  const std::array<double, 4> base{g.rho0, 0.0, 0.0, g.h0};
  for (int c = 0; c < 4; ++c) {
    out[c].assign(s[c].coefficients().begin(), s[c].coefficients().end());
    out[c][0] -= base[c];
  }
  return out;
}

inline State from_spectral(const TorusGrid &grid, const SpectralState &w, const GasParams &g)
{
  const std::array<double, 4> base{g.rho0, 0.0, 0.0, g.h0};
  std::array<std::vector<cplx>, 4> full = w;
  for (int c = 0; c < 4; ++c) full[c][0] += base[c];
  return {Field::from_coefficients(grid, std::move(full[0])),
          Field::from_coefficients(grid, std::move(full[1])),
          Field::from_coefficients(grid, std::move(full[2])),
          Field::from_coefficients(grid, std::move(full[3]))};
}

/// Evaluates the classical-form right-hand side
///
///   rho_t = -(u rho_x + v rho_y + rho (u_x + v_y))
///   u_t   = -(u u_x + v u_y + h_x + (h/rho) rho_x)
///   v_t   = -(u v_x + v v_y + h_y + (h/rho) rho_y)
///   h_t   = -(u h_x + v h_y + (gamma-1) h (u_x + v_y))
///
/// on perturbation coefficients. Each component is assembled in physical
/// space and dealiased once after its full product chain. Buffers are owned
/// so repeated calls on one grid do not allocate.
class RhsKernel {
public:
  RhsKernel(const TorusGrid &grid, const GasParams &gas, RhsOptions opts)
      : grid_(grid), gas_(gas), opts_(opts)
  {
    gas.validate();
    for (auto &v : value_) v.resize(grid.sample_count());
    for (auto &v : dx_) v.resize(grid.sample_count());
    for (auto &v : dy_) v.resize(grid.sample_count());
    scratch_.resize(grid.coefficient_count());
    out_phys_.resize(grid.sample_count());
  }

  const TorusGrid &grid() const { return grid_; }

  void operator()(const SpectralState &w, SpectralState &out)
  {
    auto &fft = transform_for(grid_.size());
    const std::array<double, 4> base{gas_.rho0, 0.0, 0.0, gas_.h0};
    for (int c = 0; c < 4; ++c) {
      fft.backward(w[c], value_[c]);
      if (base[c] != 0.0)
        for (auto &x : value_[c]) x += base[c];
      derivative_x(grid_, w[c], scratch_);
      fft.backward(scratch_, dx_[c]);
      derivative_y(grid_, w[c], scratch_);
      fft.backward(scratch_, dy_[c]);
    }
    check_domain();

    const auto &rho = value_[0], &u = value_[1], &v = value_[2], &h = value_[3];
    const std::size_t m = grid_.sample_count();
    const double gm1 = gas_.gamma - 1.0;
    for (int c = 0; c < 4; ++c) {
      for (std::size_t k = 0; k < m; ++k) {
        const double div = dx_[1][k] + dy_[2][k];
        const double adv = u[k] * dx_[c][k] + v[k] * dy_[c][k];
        double r = 0.0;
        switch (c) {
        case 0: r = adv + rho[k] * div; break;
        case 1: r = adv + dx_[3][k] + h[k] / rho[k] * dx_[0][k]; break;
        case 2: r = adv + dy_[3][k] + h[k] / rho[k] * dy_[0][k]; break;
        case 3: r = adv + gm1 * h[k] * div; break;
        }
        out_phys_[k] = -r;
      }
      out[c].resize(grid_.coefficient_count());
      fft.forward(out_phys_, out[c]);
      if (opts_.dealias) apply_dealias(grid_, out[c]);
    }
  }

  /// Physical (rho, u, v, h) from the last evaluation.
  const std::array<std::vector<double>, 4> &values() const { return value_; }

private:
  void check_domain() const
  {
    for (int c : {0, 3}) {
      double mn = std::numeric_limits<double>::infinity();
      for (double x : value_[c]) {
        if (!std::isfinite(x)) throw std::domain_error(std::string("non-finite ") + State::names[c]);
        mn = std::min(mn, x);
      }
      if (!(mn > opts_.floor)) throw StateSpaceError(State::names[c], mn);
    }
    for (int c : {1, 2})
      for (double x : value_[c])
        if (!std::isfinite(x)) throw std::domain_error(std::string("non-finite ") + State::names[c]);
  }

  TorusGrid grid_;
  GasParams gas_;
  RhsOptions opts_;
  std::array<std::vector<double>, 4> value_, dx_, dy_;
  std::vector<cplx> scratch_;
  std::vector<double> out_phys_;
};

} // namespace detail

/// -(A(U) U_x + B(U) U_y), the time derivative of U under the gas system.
inline State rhs(const State &s, const GasParams &g, RhsOptions opts = {})
{
  detail::RhsKernel kernel(s.grid(), g, opts);
  const auto w = detail::to_spectral(s, g);
  detail::SpectralState out;
  kernel(w, out);
  // The right-hand side carries no base offset.
  return {Field::from_coefficients(s.grid(), std::move(out[0])),
          Field::from_coefficients(s.grid(), std::move(out[1])),
          Field::from_coefficients(s.grid(), std::move(out[2])),
          Field::from_coefficients(s.grid(), std::move(out[3]))};
}

} // namespace gaslab
