#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gaslab/field.hpp"

namespace gaslab {

/// Samples as CSV with header "x,y,value", x outermost.
inline void write_field_csv(std::ostream &os, const Field &f)
{
  const int n = f.grid().size();
  const auto &x = f.grid().coordinates();
  os << "x,y,value\n" << std::setprecision(17);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) os << x[i] << ',' << x[j] << ',' << f(i, j) << '\n';
}

/// Spectral dump {N, modes: [{kx, ky, re, im}]} over the full spectrum,
/// listing modes whose magnitude exceeds `threshold`.
inline nlohmann::json field_spectrum_json(const Field &f, double threshold = 1e-14)
{
  const TorusGrid &g = f.grid();
  const int n = g.size();
  // Fold a wavenumber back into the table {-N/2+1, ..., N/2}.
  auto wrap = [n](int k) { return k <= -n / 2 ? k + n : k; };
  nlohmann::json modes = nlohmann::json::array();
  auto emit = [&](int kx, int ky, cplx c) {
    if (std::abs(c) > threshold) {
      modes.push_back({{"kx", kx}, {"ky", ky}, {"re", c.real()}, {"im", c.imag()}});
    }
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < g.spectral_columns(); ++j) {
      const cplx c = f.coefficient(i, j);
      emit(g.kx(i), j, c);
      if (j != 0 && j != n / 2) emit(wrap(-g.kx(i)), -j, std::conj(c));
    }
  }
  return {{"N", n}, {"modes", std::move(modes)}};
}

/// Inverse of field_spectrum_json; modes with ky < 0 are ignored since they
/// are implied by conjugate symmetry.
inline Field field_from_spectrum_json(const nlohmann::json &j)
{
  const TorusGrid grid(j.at("N").get<int>());
  const int n = grid.size();
  std::vector<cplx> c(grid.coefficient_count());
  for (const auto &m : j.at("modes")) {
    const int kx = m.at("kx").get<int>(), ky = m.at("ky").get<int>();
    if (ky < 0) continue;
    const int i = kx >= 0 ? kx : kx + n;
    c[static_cast<std::size_t>(i) * grid.spectral_columns() + ky] =
        cplx(m.at("re").get<double>(), m.at("im").get<double>());
  }
  return Field::from_coefficients(grid, std::move(c));
}

} // namespace gaslab
