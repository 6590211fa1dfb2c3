#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "gaslab/field.hpp"

namespace gaslab {

/// Seeded random trig polynomial with power-law spectral decay.
struct RandomFieldSpec {
  int max_mode = 8;
  double spectrum_decay = 2.0;
  std::uint64_t seed = 0;
};

/// Per-task seed derived from a base seed and a task index.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index)
{
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Mode list of the random polynomial. Independent of the grid, so the same
/// spec synthesizes the same function at every resolution.
inline std::vector<Mode> random_modes(const RandomFieldSpec &spec)
{
  if (spec.max_mode < 0 || spec.spectrum_decay < 0.0) {
    throw std::invalid_argument("RandomFieldSpec: max_mode and decay must be non-negative");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Mode> modes;
  const int m = spec.max_mode;
  for (int ky = 0; ky <= m; ++ky) {
    for (int kx = -m; kx <= m; ++kx) {
      if (ky == 0 && kx < 0) continue;
      const double scale = std::pow(1.0 + kx * kx + ky * ky, -0.5 * spec.spectrum_decay);
      const double a = normal(rng) * scale;
      const double b = normal(rng) * scale;
      modes.push_back({kx, ky, a, ModeKind::cos, 0.0});
      if (kx != 0 || ky != 0) modes.push_back({kx, ky, b, ModeKind::sin, 0.0});
    }
  }
  return modes;
}

inline Field random_field(const TorusGrid &grid, const RandomFieldSpec &spec)
{
  if (spec.max_mode > grid.dealias_cutoff()) {
    throw std::invalid_argument("random_field: max_mode exceeds N/3");
  }
  const auto modes = random_modes(spec);
  return synthesize(grid, modes);
}

/// Lambda^sigma (f u) - f Lambda^sigma u, evaluated alias-free on the 2x grid.
inline Field commutator(const Field &f, const Field &u, double sigma)
{
  Field::require_same_grid(f, u);
  const TorusGrid fine(2 * f.grid().size());
  const Field ff = resample(f, fine), uf = resample(u, fine);
  return lambda_pow(multiply(ff, uf), sigma) - multiply(ff, lambda_pow(uf, sigma));
}

/// ||[Lambda^sigma, f] u||_{L2} / (||f||_k ||u||_{sigma-1}), for k > 2 and
/// 1 < sigma <= k.
inline double commutator_ratio(const Field &f, const Field &u, double sigma, double k)
{
  if (!(k > 2.0) || !(sigma > 1.0 && sigma <= k)) {
    throw std::invalid_argument("commutator_ratio: need k > 2 and 1 < sigma <= k");
  }
  const double num = sobolev_norm(commutator(f, u, sigma), 0.0);
  const double den = sobolev_norm(f, k) * sobolev_norm(u, sigma - 1.0);
  return den > 0.0 ? num / den : 0.0;
}

/// ||f/rho||_sigma / ((1 + ||rho - mean rho||_s^sigma) ||f||_sigma) with the
/// quotient formed pointwise and dealiased.
inline double reciprocal_ratio(const Field &f, const Field &rho, double sigma, double s)
{
  if (!(s > 1.0) || !(sigma <= s)) {
    throw std::invalid_argument("reciprocal_ratio: need s > 1 and sigma <= s");
  }
  Field::require_same_grid(f, rho);
  if (const double m = rho.min(); !(m > 0.0)) {
    throw std::domain_error("reciprocal_ratio: density minimum " + std::to_string(m) + " <= 0");
  }
  const double num = sobolev_norm(dealias(divide(f, rho)), sigma);
  const double fluct = sobolev_norm(rho.plus_constant(-rho.mean()), s);
  const double den = (1.0 + std::pow(fluct, sigma)) * sobolev_norm(f, sigma);
  return den > 0.0 ? num / den : 0.0;
}

/// ||f g||_sigma / (||f||_sigma ||g||_sigma), product alias-free on the 2x grid.
inline double algebra_ratio(const Field &f, const Field &g, double sigma)
{
  if (!(sigma > 1.0)) throw std::invalid_argument("algebra_ratio: need sigma > 1");
  const double num = sobolev_norm(refined_product(f, g), sigma);
  const double den = sobolev_norm(f, sigma) * sobolev_norm(g, sigma);
  return den > 0.0 ? num / den : 0.0;
}

/// ||u||_sigma^alpha ||u||_tau^beta - ||u||_s with alpha = (tau - s)/(tau - sigma),
/// beta = (s - sigma)/(tau - sigma). Non-negative up to round-off.
inline double interpolation_gap(const Field &u, double sigma, double s, double tau)
{
  if (!(sigma < s && s < tau)) {
    throw std::invalid_argument("interpolation_gap: need sigma < s < tau");
  }
  const double alpha = (tau - s) / (tau - sigma);
  const double beta = (s - sigma) / (tau - sigma);
  return std::pow(sobolev_norm(u, sigma), alpha) * std::pow(sobolev_norm(u, tau), beta) -
         sobolev_norm(u, s);
}

} // namespace gaslab
