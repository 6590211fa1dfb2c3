#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gaslab/inequalities.hpp"

using namespace gaslab;
using std::numbers::pi;

namespace {

Field rf(const TorusGrid &g, std::uint64_t seed) { return random_field(g, RandomFieldSpec{6, 2.0, seed}); }

/// Translate by whole grid cells, which is exact for samples.
Field shift(const Field &f, int di, int dj)
{
  const int n = f.grid().size();
  std::vector<double> out(f.grid().sample_count());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i * n + j] = f(((i + di) % n + n) % n, ((j + dj) % n + n) % n);
  return Field::from_samples(f.grid(), std::move(out));
}

} // namespace

TEST(RandomField, DeterministicAndGridIndependent)
{
  const TorusGrid g(32), fine(64);
  const Field a = rf(g, 5), b = rf(g, 5), c = rf(g, 6);
  EXPECT_EQ((a - b).max_abs(), 0.0);
  EXPECT_GT((a - c).max_abs(), 0.0);
  EXPECT_LT(sobolev_norm(resample(a, fine) - rf(fine, 5), 0.0), 1e-13);
  EXPECT_THROW(random_field(TorusGrid(12), RandomFieldSpec{5, 2.0, 0}), std::invalid_argument);
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
}

TEST(Commutator, ConstantMultiplierVanishes)
{
  const TorusGrid g(32);
  const Field u = rf(g, 1);
  EXPECT_LT(sobolev_norm(commutator(Field::constant(g, 2.5), u, 1.5), 0.0), 1e-12 * sobolev_norm(u, 1.5));
  EXPECT_LT(commutator_ratio(Field::constant(g, 2.5), u, 1.5, 3.0), 1e-12);
}

TEST(Commutator, ConstantArgumentClosedForm)
{
  // u = c: [Lambda^2, f] c = c (Lambda^2 f - f) = c * 9 cos 3x, L2 norm 9|c| pi sqrt2.
  const TorusGrid g(32);
  const double c = -1.7;
  const Field f = synthesize(g, {Mode{3, 0, 1.0}});
  const double num = sobolev_norm(commutator(f, Field::constant(g, c), 2.0), 0.0);
  EXPECT_NEAR(num, 9 * std::abs(c) * pi * std::sqrt(2.0), 1e-11);
}

TEST(Commutator, Preconditions)
{
  const TorusGrid g(16);
  const Field f = rf(TorusGrid(32), 1);
  EXPECT_THROW(commutator_ratio(f, f, 1.5, 2.0), std::invalid_argument);
  EXPECT_THROW(commutator_ratio(f, f, 3.5, 3.0), std::invalid_argument);
  EXPECT_THROW(commutator_ratio(f, f, 1.0, 3.0), std::invalid_argument);
  EXPECT_THROW(commutator(f, Field(g), 1.5), std::invalid_argument);
}

TEST(Reciprocal, Oracles)
{
  const TorusGrid g(32);
  const Field f = rf(g, 2);
  EXPECT_NEAR(reciprocal_ratio(f, Field::constant(g, 2.0), 1.5, 3.0), 0.5, 1e-14);
  EXPECT_EQ(reciprocal_ratio(Field(g), Field::constant(g, 2.0), 1.5, 3.0), 0.0);
  EXPECT_THROW(reciprocal_ratio(f, Field::constant(g, -1.0), 1.5, 3.0), std::domain_error);
  EXPECT_THROW(reciprocal_ratio(f, Field::constant(g, 1.0), 3.5, 3.0), std::invalid_argument);
}

TEST(Algebra, Oracles)
{
  const TorusGrid g(32);
  const Field f = rf(g, 3);
  EXPECT_NEAR(algebra_ratio(f, Field::constant(g, -3.0), 2.0), 1 / (2 * pi), 1e-14);
  // cos^2 y = (1 + cos 2y)/2: numerator pi sqrt(4 + 25/2) ... over (pi sqrt2 * 2)^2.
  const Field c = synthesize(g, {Mode{0, 1, 1.0}});
  EXPECT_NEAR(algebra_ratio(c, c, 2.0), std::sqrt(13.5) / (8 * pi), 1e-14);
  EXPECT_THROW(algebra_ratio(f, f, 1.0), std::invalid_argument);
}

TEST(Interpolation, EqualityAndZeroCases)
{
  const TorusGrid g(64);
  for (int n = 1; n <= 21; ++n) {
    const Field u = synthesize(g, {Mode{0, n, 0.7}});
    EXPECT_LE(std::abs(interpolation_gap(u, 1.5, 3.0, 4.0)), 1e-12 * sobolev_norm(u, 3.0)) << n;
  }
  const Field oblique = synthesize(g, {Mode{3, -4, 2.0, ModeKind::sin, 0.3}});
  EXPECT_LE(std::abs(interpolation_gap(oblique, 1.5, 3.0, 4.0)), 1e-12 * sobolev_norm(oblique, 3.0));
  EXPECT_EQ(interpolation_gap(Field(g), 1.5, 3.0, 4.0), 0.0);
  EXPECT_THROW(interpolation_gap(oblique, 3.0, 3.0, 4.0), std::invalid_argument);
}

TEST(Interpolation, TwoModeFieldsAreStrict)
{
  const TorusGrid g(64);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> k(-21, 21);
  std::uniform_real_distribution<double> a(0.1, 3.0);
  int distinct = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Mode m1{k(rng), k(rng), a(rng)}, m2{k(rng), k(rng), a(rng), ModeKind::sin};
    const Field u = synthesize(g, {m1, m2});
    const double norm = sobolev_norm(u, 3.0);
    if (norm == 0.0) continue;
    const double gap = interpolation_gap(u, 1.5, 3.0, 4.0);
    ASSERT_GE(gap, -1e-10 * norm);
    if (m1.kx * m1.kx + m1.ky * m1.ky != m2.kx * m2.kx + m2.ky * m2.ky) {
      ++distinct;
      EXPECT_GT(gap, 0.0);
    }
  }
  EXPECT_GT(distinct, 400);
}

TEST(Inequalities, TranslationInvariance)
{
  const TorusGrid g(32);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Field f = rf(g, seed), u = rf(g, seed + 100);
    const Field rho = (0.4 / u.max_abs() * u).plus_constant(1.0);
    const Field fs = shift(f, 3, -5), us = shift(u, 3, -5), rhos = shift(rho, 3, -5);
    auto same = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), 1e-300); };
    EXPECT_TRUE(same(commutator_ratio(f, u, 1.5, 3.0), commutator_ratio(fs, us, 1.5, 3.0)));
    EXPECT_TRUE(same(reciprocal_ratio(f, rho, 1.5, 3.0), reciprocal_ratio(fs, rhos, 1.5, 3.0)));
    EXPECT_TRUE(same(algebra_ratio(f, u, 1.5), algebra_ratio(fs, us, 1.5)));
    EXPECT_TRUE(same(interpolation_gap(f, 1.5, 3.0, 4.0) + 1.0, interpolation_gap(fs, 1.5, 3.0, 4.0) + 1.0));
  }
}

TEST(Inequalities, RatiosStableUnderRefinement)
{
  const TorusGrid g(64), fine(128);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RandomFieldSpec sf{21, 2.0, seed}, su{21, 2.0, seed + 50};
    const double a = commutator_ratio(random_field(g, sf), random_field(g, su), 1.5, 3.0);
    const double b = commutator_ratio(random_field(fine, sf), random_field(fine, su), 1.5, 3.0);
    EXPECT_NEAR(a, b, 1e-10 * a);
    const double c = algebra_ratio(random_field(g, sf), random_field(g, su), 1.5);
    const double d = algebra_ratio(random_field(fine, sf), random_field(fine, su), 1.5);
    EXPECT_NEAR(c, d, 1e-10 * c);
  }
}
