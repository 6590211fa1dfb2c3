#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gaslab/fft.hpp"
#include "gaslab/grid.hpp"

namespace gaslab {

/// One real scalar field on a TorusGrid.
///
/// Samples are stored row-major with the x index outermost: sample (i, j) is
/// the value at (x_i, y_j) and lives at i*N + j. Coefficients use the
/// real-to-complex half layout: row i carries kx = grid.kx(i), column j
/// carries ky = j for j = 0..N/2, and the remaining half of the spectrum is
/// implied by conjugate symmetry. Both representations are held and kept
/// consistent; a Field never changes after construction.
class Field {
public:
  explicit Field(const TorusGrid &grid)
      : grid_(grid), samples_(grid.sample_count(), 0.0),
        coeffs_(grid.coefficient_count(), cplx{})
  {
  }

  static Field from_samples(const TorusGrid &grid, std::vector<double> samples)
  {
    if (samples.size() != grid.sample_count()) {
      throw std::invalid_argument("Field: expected " + std::to_string(grid.sample_count()) +
                                  " samples, got " + std::to_string(samples.size()));
    }
    for (double v : samples) {
      if (!std::isfinite(v)) {
        throw std::domain_error("Field: non-finite sample");
      }
    }
    std::vector<cplx> coeffs(grid.coefficient_count());
    detail::transform_for(grid.size()).forward(samples, coeffs);
    return Field(grid, std::move(samples), std::move(coeffs));
  }

  /// The caller is responsible for conjugate symmetry in columns 0 and N/2.
  static Field from_coefficients(const TorusGrid &grid, std::vector<cplx> coeffs)
  {
    if (coeffs.size() != grid.coefficient_count()) {
      throw std::invalid_argument("Field: coefficient array has wrong size");
    }
    std::vector<double> samples(grid.sample_count());
    detail::transform_for(grid.size()).backward(coeffs, samples);
    for (double v : samples) {
      if (!std::isfinite(v)) {
        throw std::domain_error("Field: non-finite sample");
      }
    }
    return Field(grid, std::move(samples), std::move(coeffs));
  }

  static Field constant(const TorusGrid &grid, double value)
  {
    Field f(grid);
    std::fill(f.samples_.begin(), f.samples_.end(), value);
    f.coeffs_[0] = value;
    return f;
  }

  const TorusGrid &grid() const { return grid_; }
  std::span<const double> samples() const { return samples_; }
  std::span<const cplx> coefficients() const { return coeffs_; }

  double operator()(int i, int j) const
  {
    return samples_[static_cast<std::size_t>(i) * grid_.size() + j];
  }
  cplx coefficient(int i, int j) const
  {
    return coeffs_[static_cast<std::size_t>(i) * grid_.spectral_columns() + j];
  }

  double min() const { return *std::min_element(samples_.begin(), samples_.end()); }
  double max() const { return *std::max_element(samples_.begin(), samples_.end()); }
  double mean() const { return coeffs_[0].real(); }
  double max_abs() const
  {
    double m = 0.0;
    for (double v : samples_) m = std::max(m, std::abs(v));
    return m;
  }

  Field operator-() const { return scaled(-1.0); }

  Field scaled(double a) const
  {
    Field out(*this);
    for (auto &v : out.samples_) v *= a;
    for (auto &c : out.coeffs_) c *= a;
    return out;
  }

  friend Field operator+(const Field &a, const Field &b) { return combine(a, b, 1.0); }
  friend Field operator-(const Field &a, const Field &b) { return combine(a, b, -1.0); }
  friend Field operator*(double a, const Field &f) { return f.scaled(a); }
  friend Field operator*(const Field &f, double a) { return f.scaled(a); }

  static void require_same_grid(const Field &a, const Field &b)
  {
    if (!(a.grid_ == b.grid_)) {
      throw std::invalid_argument("Field: grids differ (" + std::to_string(a.grid_.size()) +
                                  " vs " + std::to_string(b.grid_.size()) + ")");
    }
  }

  Field plus_constant(double c) const
  {
    Field out(*this);
    for (auto &v : out.samples_) v += c;
    out.coeffs_[0] += c;
    return out;
  }

private:
  Field(const TorusGrid &grid, std::vector<double> samples, std::vector<cplx> coeffs)
      : grid_(grid), samples_(std::move(samples)), coeffs_(std::move(coeffs))
  {
  }

  static Field combine(const Field &a, const Field &b, double sign)
  {
    require_same_grid(a, b);
    Field out(a);
    for (std::size_t k = 0; k < out.samples_.size(); ++k) out.samples_[k] += sign * b.samples_[k];
    for (std::size_t k = 0; k < out.coeffs_.size(); ++k) out.coeffs_[k] += sign * b.coeffs_[k];
    return out;
  }

  TorusGrid grid_;
  std::vector<double> samples_;
  std::vector<cplx> coeffs_;
};

// ---------------------------------------------------------------------------
// Raw spectral kernels, shared with the time stepper.

namespace detail {

inline bool is_nyquist(const TorusGrid &g, int i, int j)
{
  return i == g.size() / 2 || j == g.size() / 2;
}

inline void derivative_x(const TorusGrid &g, std::span<const cplx> in, std::span<cplx> out)
{
  const int n = g.size(), cols = g.spectral_columns();
  for (int i = 0; i < n; ++i) {
    const double k = g.kx(i);
    for (int j = 0; j < cols; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * cols + j;
      out[idx] = is_nyquist(g, i, j) ? cplx{} : cplx(0.0, k) * in[idx];
    }
  }
}

inline void derivative_y(const TorusGrid &g, std::span<const cplx> in, std::span<cplx> out)
{
  const int n = g.size(), cols = g.spectral_columns();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cols; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * cols + j;
      out[idx] = is_nyquist(g, i, j) ? cplx{} : cplx(0.0, j) * in[idx];
    }
  }
}

/// Zeroes every mode with max(|kx|, |ky|) > floor(N/3).
inline void apply_dealias(const TorusGrid &g, std::span<cplx> c)
{
  const int n = g.size(), cols = g.spectral_columns(), cut = g.dealias_cutoff();
  for (int i = 0; i < n; ++i) {
    const bool row_out = std::abs(g.kx(i)) > cut;
    for (int j = 0; j < cols; ++j) {
      if (row_out || j > cut) c[static_cast<std::size_t>(i) * cols + j] = cplx{};
    }
  }
}

/// Exponential filter exp(-strength (|k|/kmax)^order) applied per axis.
inline void apply_exponential_filter(const TorusGrid &g, std::span<cplx> c, double order,
                                     double strength)
{
  const int n = g.size(), cols = g.spectral_columns();
  const double kmax = n / 2.0;
  auto weight = [&](int k) { return std::exp(-strength * std::pow(std::abs(k) / kmax, order)); };
  for (int i = 0; i < n; ++i) {
    const double wx = weight(g.kx(i));
    for (int j = 0; j < cols; ++j) c[static_cast<std::size_t>(i) * cols + j] *= wx * weight(j);
  }
}

/// Multiplicity of a half-layout column in the full spectrum.
inline double column_weight(const TorusGrid &g, int j)
{
  return (j == 0 || j == g.size() / 2) ? 1.0 : 2.0;
}

} // namespace detail

// ---------------------------------------------------------------------------

enum class ModeKind { cos, sin };

/// amplitude * cos(kx x + ky y + phase), or sin of the same argument.
struct Mode {
  int kx = 0;
  int ky = 0;
  double amplitude = 0.0;
  ModeKind kind = ModeKind::cos;
  double phase = 0.0;
};

/// Builds the trig polynomial sum_m mode_m on the grid.
///
/// Modes are placed directly in spectral space and transformed once, so the
/// samples agree with pointwise evaluation to round-off. The Nyquist index
/// N/2 is rejected because it cannot be differentiated exactly.
inline Field synthesize(const TorusGrid &grid, std::span<const Mode> modes)
{
  const int limit = grid.size() / 2 - 1;
  const int cols = grid.spectral_columns();
  const int n = grid.size();
  std::vector<cplx> c(grid.coefficient_count());
  auto slot = [&](int kx, int ky) -> cplx & {
    const int i = kx >= 0 ? kx : kx + n;
    return c[static_cast<std::size_t>(i) * cols + ky];
  };
  for (const Mode &m : modes) {
    if (std::abs(m.kx) > limit || std::abs(m.ky) > limit) {
      throw std::invalid_argument("synthesize: mode (" + std::to_string(m.kx) + ", " +
                                  std::to_string(m.ky) + ") not representable on N=" +
                                  std::to_string(n));
    }
    // Coefficient attached to exp(+i k.x); its conjugate sits at -k.
    const cplx rot = std::polar(1.0, m.phase);
    const cplx plus = m.kind == ModeKind::cos ? 0.5 * m.amplitude * rot
                                              : cplx(0.0, -0.5) * m.amplitude * rot;
    if (m.ky > 0) {
      slot(m.kx, m.ky) += plus;
    } else if (m.ky < 0) {
      slot(-m.kx, -m.ky) += std::conj(plus);
    } else {
      slot(m.kx, 0) += plus;
      slot(-m.kx, 0) += std::conj(plus);
    }
  }
  return Field::from_coefficients(grid, std::move(c));
}

inline Field synthesize(const TorusGrid &grid, std::initializer_list<Mode> modes)
{
  return synthesize(grid, std::span<const Mode>(modes.begin(), modes.size()));
}

inline Field partial_x(const Field &f)
{
  std::vector<cplx> out(f.grid().coefficient_count());
  detail::derivative_x(f.grid(), f.coefficients(), out);
  return Field::from_coefficients(f.grid(), std::move(out));
}

inline Field partial_y(const Field &f)
{
  std::vector<cplx> out(f.grid().coefficient_count());
  detail::derivative_y(f.grid(), f.coefficients(), out);
  return Field::from_coefficients(f.grid(), std::move(out));
}

/// Applies the Fourier multiplier (1 + |k|^2)^(sigma/2), i.e. (1 - Laplacian)^(sigma/2).
inline Field lambda_pow(const Field &f, double sigma)
{
  const TorusGrid &g = f.grid();
  const int n = g.size(), cols = g.spectral_columns();
  std::vector<cplx> out(f.coefficients().begin(), f.coefficients().end());
  for (int i = 0; i < n; ++i) {
    const double kx2 = static_cast<double>(g.kx(i)) * g.kx(i);
    for (int j = 0; j < cols; ++j) {
      out[static_cast<std::size_t>(i) * cols + j] *=
          std::pow(1.0 + kx2 + static_cast<double>(j) * j, 0.5 * sigma);
    }
  }
  return Field::from_coefficients(g, std::move(out));
}

/// H^sigma norm with the un-normalized Lebesgue measure on [0, 2pi)^2:
/// ||f||^2 = (2pi)^2 sum_k (1 + |k|^2)^sigma |c_k|^2, so ||1|| = 2pi.
inline double sobolev_norm(const Field &f, double sigma)
{
  const TorusGrid &g = f.grid();
  const int n = g.size(), cols = g.spectral_columns();
  const auto c = f.coefficients();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double kx2 = static_cast<double>(g.kx(i)) * g.kx(i);
    for (int j = 0; j < cols; ++j) {
      const double w = std::pow(1.0 + kx2 + static_cast<double>(j) * j, sigma);
      sum += detail::column_weight(g, j) * w * std::norm(c[static_cast<std::size_t>(i) * cols + j]);
    }
  }
  return 2.0 * std::numbers::pi * std::sqrt(sum);
}

inline Field dealias(const Field &f)
{
  std::vector<cplx> out(f.coefficients().begin(), f.coefficients().end());
  detail::apply_dealias(f.grid(), out);
  return Field::from_coefficients(f.grid(), std::move(out));
}

/// Pointwise product in physical space. No dealiasing is applied.
inline Field multiply(const Field &a, const Field &b)
{
  Field::require_same_grid(a, b);
  std::vector<double> out(a.grid().sample_count());
  const auto sa = a.samples(), sb = b.samples();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = sa[k] * sb[k];
  return Field::from_samples(a.grid(), std::move(out));
}

inline Field divide(const Field &a, const Field &b)
{
  Field::require_same_grid(a, b);
  std::vector<double> out(a.grid().sample_count());
  const auto sa = a.samples(), sb = b.samples();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = sa[k] / sb[k];
  return Field::from_samples(a.grid(), std::move(out));
}

inline Field map(const Field &f, const std::function<double(double)> &fn)
{
  std::vector<double> out(f.samples().begin(), f.samples().end());
  for (auto &v : out) v = fn(v);
  return Field::from_samples(f.grid(), std::move(out));
}

/// Field sampled from fn(x, y).
inline Field sample(const TorusGrid &grid, const std::function<double(double, double)> &fn)
{
  const int n = grid.size();
  const auto &x = grid.coordinates();
  std::vector<double> out(grid.sample_count());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i) * n + j] = fn(x[i], x[j]);
  return Field::from_samples(grid, std::move(out));
}

/// Transfers the spectrum onto a grid of a different size.
///
/// Modes with |kx| or |ky| >= min(N, M)/2 are dropped, Nyquist included,
/// so refinement is exact for fields without Nyquist content.
inline Field resample(const Field &f, const TorusGrid &target)
{
  const TorusGrid &src = f.grid();
  const int keep = std::min(src.size(), target.size()) / 2 - 1;
  const int src_cols = src.spectral_columns(), dst_cols = target.spectral_columns();
  std::vector<cplx> out(target.coefficient_count());
  const auto c = f.coefficients();
  for (int kx = -keep; kx <= keep; ++kx) {
    const int si = kx >= 0 ? kx : kx + src.size();
    const int di = kx >= 0 ? kx : kx + target.size();
    for (int ky = 0; ky <= keep; ++ky) {
      out[static_cast<std::size_t>(di) * dst_cols + ky] = c[static_cast<std::size_t>(si) * src_cols + ky];
    }
  }
  return Field::from_coefficients(target, std::move(out));
}

/// Product of two fields evaluated alias-free on a grid of twice the size.
inline Field refined_product(const Field &a, const Field &b)
{
  Field::require_same_grid(a, b);
  const TorusGrid fine(2 * a.grid().size());
  return multiply(resample(a, fine), resample(b, fine));
}

} // namespace gaslab
