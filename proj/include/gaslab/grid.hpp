#pragma once

#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaslab {

/// Uniform N x N discretization of the 2-torus [0, 2pi)^2.
///
/// Node j on either axis sits at 2*pi*j/N. Wavenumbers follow the standard
/// DFT layout for period 2pi: index j carries j for j <= N/2 and j - N
/// otherwise, so the table spans {-N/2+1, ..., N/2}.
class TorusGrid {
public:
  explicit TorusGrid(int n) : n_(n)
  {
    if (n < 4 || n % 2 != 0) {
      throw std::invalid_argument("TorusGrid: size must be even and >= 4, got " +
                                  std::to_string(n));
    }
    coords_.resize(static_cast<std::size_t>(n));
    wavenumbers_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      coords_[j] = 2.0 * std::numbers::pi * j / n;
      wavenumbers_[j] = j <= n / 2 ? j : j - n;
    }
  }

  int size() const { return n_; }
  /// Number of stored spectral columns in the real-to-complex layout.
  int spectral_columns() const { return n_ / 2 + 1; }
  std::size_t sample_count() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t coefficient_count() const
  {
    return static_cast<std::size_t>(n_) * spectral_columns();
  }
  double spacing() const { return 2.0 * std::numbers::pi / n_; }

  const std::vector<double> &coordinates() const { return coords_; }
  const std::vector<int> &wavenumbers() const { return wavenumbers_; }

  /// Signed wavenumber of row index i (x-direction).
  int kx(int i) const { return wavenumbers_[i]; }
  /// Wavenumber of spectral column j (y-direction, 0..N/2).
  int ky(int j) const { return j; }

  /// Largest retained wavenumber under the 2/3 rule.
  int dealias_cutoff() const { return n_ / 3; }

  bool operator==(const TorusGrid &other) const { return n_ == other.n_; }

private:
  int n_;
  std::vector<double> coords_;
  std::vector<int> wavenumbers_;
};

inline TorusGrid make_grid(int n) { return TorusGrid(n); }

} // namespace gaslab
