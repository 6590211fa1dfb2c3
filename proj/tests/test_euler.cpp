#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "gaslab/euler.hpp"
#include "gaslab/families.hpp"
#include "gaslab/inequalities.hpp"

using namespace gaslab;

namespace {

Eigen::Matrix4d to_eigen(const CoeffMatrix &m)
{
  Eigen::Matrix4d e;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) e(r, c) = m(r, c);
  return e;
}

PointState random_point(std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> pos(0.5, 2.0), vel(-1.0, 1.0);
  return {pos(rng), vel(rng), vel(rng), pos(rng)};
}

double l2(const Field &f) { return sobolev_norm(f, 0.0); }

} // namespace

TEST(GasParams, Validation)
{
  EXPECT_NO_THROW(GasParams{}.validate());
  EXPECT_THROW((GasParams{1.0, 1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((GasParams{3.0, 1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((GasParams{1.4, 0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((GasParams{1.4, 1, -1}.validate()), std::invalid_argument);
}

TEST(Matrices, PrintedRows)
{
  const GasParams g;
  const CoeffMatrix a = matrix_A({1, 2, 0, 1}, g);
  const std::array<std::array<double, 4>, 3> rows{{{2, 1, 0, 0}, {1, 2, 0, 1}, {0, 0.4, 0, 2}}};
  const int idx[3] = {0, 1, 3};
  for (int k = 0; k < 3; ++k)
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(a(idx[k], c), rows[k][c], 1e-15);
  const CoeffMatrix b = matrix_B({1, 0, 0, 1}, g);
  const double row3[4] = {1, 0, 0, 1};
  for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(b(2, c), row3[c]);
  const CoeffMatrix still = matrix_A({1.3, 0, 0, 0.7}, g);
  for (int d = 0; d < 4; ++d) EXPECT_EQ(still(d, d), 0.0);
}

TEST(Matrices, SymmetrizerAtBaseState)
{
  const CoeffMatrix a0 = matrix_A0({1, 0, 0, 1}, GasParams{});
  const double diag[4] = {1, 1, 1, 2.5};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(a0(r, c), r == c ? diag[r] : 0.0, 1e-15);
}

TEST(Matrices, SymmetrizerProductsAtOnePoint)
{
  const GasParams g;
  const PointState p{1, 0.3, -0.2, 1.1};
  EXPECT_LT((matrix_A0(p, g) * matrix_A(p, g)).max_abs_diff(matrix_A1(p, g)), 1e-12);
  EXPECT_LT((matrix_A0(p, g) * matrix_B(p, g)).max_abs_diff(matrix_B1(p, g)), 1e-12);
}

TEST(Matrices, SymmetrizerPropertiesOverRandomPoints)
{
  std::mt19937_64 rng(7);
  for (double gamma : {1.1, 1.4, 5.0 / 3.0, 2.5}) {
    const GasParams g{gamma, 1.0, 1.0};
    for (int k = 0; k < 1000; ++k) {
      const PointState p = random_point(rng);
      const CoeffMatrix a1 = matrix_A1(p, g), b1 = matrix_B1(p, g);
      ASSERT_LT((matrix_A0(p, g) * matrix_A(p, g)).max_abs_diff(a1), 1e-12);
      ASSERT_LT((matrix_A0(p, g) * matrix_B(p, g)).max_abs_diff(b1), 1e-12);
      ASSERT_EQ(a1.max_abs_diff(a1.transposed()), 0.0);
      ASSERT_EQ(b1.max_abs_diff(b1.transposed()), 0.0);
      const Eigen::Matrix4d a0 = to_eigen(matrix_A0(p, g));
      for (int m = 1; m <= 4; ++m) ASSERT_GT(a0.topLeftCorner(m, m).determinant(), 0.0);
    }
  }
}

TEST(Matrices, KappaBoundNearBaseState)
{
  for (const GasParams g : {GasParams{}, GasParams{1.4, 2.0, 0.5}, GasParams{2.0, 0.7, 1.3}}) {
    const double kappa = symmetrizer_kappa(g);
    const double r = 0.1 * std::min(g.rho0, g.h0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-r, r);
    for (int k = 0; k < 500; ++k) {
      const PointState p{g.rho0 + d(rng), d(rng), d(rng), g.h0 + d(rng)};
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(to_eigen(matrix_A0(p, g)));
      ASSERT_GE(es.eigenvalues().minCoeff(), kappa);
    }
  }
  EXPECT_DOUBLE_EQ(symmetrizer_kappa(GasParams{}), 0.5);
}

TEST(Matrices, RejectOutsideStateSpace)
{
  const GasParams g;
  EXPECT_THROW(matrix_A({0, 0, 0, 1}, g), StateSpaceError);
  EXPECT_THROW(matrix_A0({1, 0, 0, -1}, g), StateSpaceError);
  try {
    matrix_B({-0.5, 0, 0, 1}, g);
    FAIL();
  } catch (const StateSpaceError &e) {
    EXPECT_EQ(e.field(), "rho");
    EXPECT_EQ(e.minimum(), -0.5);
  }
}

TEST(Matrices, CouplingMatrixEntries)
{
  const GasParams g;
  const CoeffMatrix zero = matrix_C({1.2, 0.1, 0.3, 0.9}, PointGradient{}, 1.0, g);
  EXPECT_EQ(zero.max_abs_diff(CoeffMatrix{}), 0.0);
  PointGradient d;
  d.rho_x = 1;
  const CoeffMatrix c = matrix_C({1, 0, 0, 1}, d, 1.0, g);
  EXPECT_DOUBLE_EQ(c(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(c(1, 0), -1.0);
  EXPECT_DOUBLE_EQ(c(1, 3), 1.0);
  PointGradient e;
  e.u_x = 1;
  EXPECT_DOUBLE_EQ(matrix_C({1, 0, 0, 1}, e, 1.0, GasParams{2.0, 1, 1})(3, 3), 1.0);
  EXPECT_TRUE(c.is_finite());
}

TEST(Rhs, ConstantStatesAreStationary)
{
  const TorusGrid grid(32);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const PointState p = random_point(rng);
    const State r = rhs(State::constant(grid, p), GasParams{});
    for (int c = 0; c < 4; ++c) EXPECT_LT(r[c].max_abs(), 1e-14);
  }
}

TEST(Rhs, ExactFamilyMatchesTimeDerivative)
{
  const GasParams g;
  for (int omega : {1, -1})
    for (int n : {1, 4, 8}) {
      const TorusGrid grid(8 * n < 16 ? 16 : 8 * n);
      for (double t : {0.0, 0.3, 1.0}) {
        const FamilyParams f{omega, n, 3.0};
        const State r = rhs(exact_solution(f, g, grid, t), g);
        const State dt = exact_time_derivative(f, g, grid, t);
        for (int c = 0; c < 4; ++c) EXPECT_LT(l2(r[c] - dt[c]), 1e-10) << "n=" << n << " c=" << c;
      }
    }
}

TEST(Rhs, AgreesWithMatrixForm)
{
  // -(A U_x + B U_y) evaluated pointwise from the matrices on a smooth state.
  const GasParams g;
  const TorusGrid grid(48);
  const Field rho = random_field(grid, {4, 2.0, 1}).plus_constant(0.0);
  const auto shift = [](const Field &f, double to) { return (0.2 / f.max_abs() * f).plus_constant(to); };
  const State s{shift(rho, 1.0), shift(random_field(grid, {4, 2.0, 2}), 0.1),
                shift(random_field(grid, {4, 2.0, 3}), -0.2), shift(random_field(grid, {4, 2.0, 4}), 1.1)};
  const State r = rhs(s, g, RhsOptions{false});
  std::array<Field, 4> dx{partial_x(s[0]), partial_x(s[1]), partial_x(s[2]), partial_x(s[3])};
  std::array<Field, 4> dy{partial_y(s[0]), partial_y(s[1]), partial_y(s[2]), partial_y(s[3])};
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.sample_count(); k += 7) {
    const PointState p{s[0].samples()[k], s[1].samples()[k], s[2].samples()[k], s[3].samples()[k]};
    const CoeffMatrix a = matrix_A(p, g), b = matrix_B(p, g);
    for (int row = 0; row < 4; ++row) {
      double expect = 0.0;
      for (int c = 0; c < 4; ++c) expect -= a(row, c) * dx[c].samples()[k] + b(row, c) * dy[c].samples()[k];
      worst = std::max(worst, std::abs(expect - r[row].samples()[k]));
    }
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Rhs, RejectsStatesOutsideDomain)
{
  const TorusGrid grid(16);
  const State bad = State::constant(grid, {1, 0, 0, -0.1});
  EXPECT_THROW(rhs(bad, GasParams{}), StateSpaceError);
}

TEST(Divergence, Oracles)
{
  const TorusGrid grid(32);
  EXPECT_LT(divergence(State::constant(grid, {1, 0.3, 0.2, 1})).max_abs(), 1e-15);
  const Field sx = sample(grid, [](double x, double) { return std::sin(x); });
  const Field cx = sample(grid, [](double x, double) { return std::cos(x); });
  const State s{Field::constant(grid, 1), sx, Field(grid), Field::constant(grid, 1)};
  EXPECT_LT((divergence(s) - cx).max_abs(), 1e-13);
  for (double t : {0.0, 0.7}) {
    EXPECT_LT(divergence(exact_solution({1, 4, 3.0}, GasParams{}, grid, t)).max_abs(), 1e-12);
  }
}

TEST(WaveSpeed, Oracles)
{
  const TorusGrid grid(8);
  EXPECT_DOUBLE_EQ(max_wave_speed(State::constant(grid, {1, 0, 0, 1}), GasParams{}), std::sqrt(1.4));
  const double eps = 1e-9;
  EXPECT_NEAR(max_wave_speed(State::constant(grid, {1, 2, 0, 1}), GasParams{1 + eps, 1, 1}),
              2 + std::sqrt(1 + eps), 1e-15);
  const double c1 = max_wave_speed(State::constant(grid, {1, 0, 0, 1.3}), GasParams{});
  const double c2 = max_wave_speed(State::constant(grid, {1, 0, 0, 2.6}), GasParams{});
  EXPECT_NEAR(c2 / c1, std::sqrt(2.0), 1e-15);
}

TEST(State, PerturbationAndNorms)
{
  const TorusGrid grid(16);
  const GasParams g{1.4, 2.0, 3.0};
  const State base = State::constant(grid, {2.0, 0, 0, 3.0});
  EXPECT_EQ(state_norm(perturbation(base, g), 3.0), 0.0);
  const State c = State::constant(grid, {1, 0, 0, 1});
  EXPECT_NEAR(state_norm(c, 1.5), 2 * std::numbers::pi * std::sqrt(2.0), 1e-13);
  EXPECT_THROW(check_state_space(State::constant(grid, {1e-9, 0, 0, 1})), StateSpaceError);
}
