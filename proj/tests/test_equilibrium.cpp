#include <gtest/gtest.h>

#include <random>

#include "anelastic.hpp"

using namespace anelastic;

namespace {

EquilibriumProfile profile_1d(const Potential& phi, int n = 50, double gamma = 1.4) {
  const Grid g = Grid::line(0.0, 1.0, n);
  return EquilibriumProfile(g, phi, gamma, 1.0, BoundaryCondition::uniform(BoundaryKind::no_flux));
}

}  // namespace

// (1 - (2/7) 0.5)^2.5 and (6/7)^3.5 to 50 digits (mpmath).
TEST(Equilibrium, DensityMatchesHighPrecisionValue) {
  const EquilibriumLaw law{1.4, 1.0};
  EXPECT_NEAR(law.rho_eq(0.5), 0.68019435901656842074278375422497924104194564155715, 2e-16);
  EXPECT_NEAR(law.rho_eq(0.09), 0.93694875100957207927790758365941862020280912932360, 2e-16);
  EXPECT_NEAR(law.exp_h(0.5), 0.58302373629991578920810036076426792089309626419184, 2e-16);
}

TEST(Equilibrium, SatisfiesHydrostaticBalance) {
  // d p_eq / dx = -rho_eq d phi / dx, checked by a fourth-order difference.
  const EquilibriumLaw law{1.4, 1.0};
  const Potential phi = Potential::sinusoidal();
  const double h = 1e-3;
  for (double x : {0.1, 0.35, 0.8}) {
    auto p = [&](double y) { return std::pow(law.rho_eq(phi(y)), 1.4); };
    const double dp = (-p(x + 2 * h) + 8 * p(x + h) - 8 * p(x - h) + p(x - 2 * h)) / (12 * h);
    EXPECT_NEAR(dp, -law.rho_eq(phi(x)) * phi.gradient(x)[0], 1e-8);
  }
}

TEST(Equilibrium, TabulatedExpHAgreesWithDirectFormula) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& phi : {Potential::linear(), Potential::quadratic(), Potential::sinusoidal()}) {
    const auto eq = profile_1d(phi);
    for (int i = 0; i < 50; ++i) {
      const double x = eq.grid().center(0, i);
      EXPECT_NEAR(eq.exp_h_cell(i), exp_h_at(eq, x), 1e-13);
      EXPECT_NEAR(eq.rho_eq_cell(i), rho_eq_at(eq, x), 1e-15);
    }
    for (int k = 0; k < 1000; ++k) {
      const double x = u(rng);
      EXPECT_NEAR(std::pow(rho_eq_at(eq, x), 1.4), exp_h_at(eq, x), 1e-13);
    }
  }
}

TEST(Equilibrium, PressureOverExpHIsOneAtEquilibrium) {
  const auto eq = profile_1d(Potential::quadratic());
  for (int i = -2; i < 52; ++i)
    EXPECT_EQ(std::pow(eq.rho_eq_cell(i), 1.4) / eq.exp_h_cell(i), 1.0) << "cell " << i;
}

TEST(Equilibrium, RejectsNonPositiveBase) {
  const Grid g = Grid::line(0.0, 1.0, 10);
  const Potential steep = Potential::custom([](double x, double) { return 10.0 * x; });
  EXPECT_THROW(EquilibriumProfile(g, steep, 1.4, 1.0), ConfigError);
  EXPECT_THROW(EquilibriumProfile(g, Potential::linear(), 1.0, 1.0), ConfigError);
}

TEST(Equilibrium, RadialVortexProfile) {
  // gamma = 2, C0 = 1, phi = r^2 gives rho_eq = 1 - r^2/2.
  const Grid g = Grid::rectangle({0.0, 0.0}, {1.0, 1.0}, {10, 10});
  const EquilibriumProfile eq(g, Potential::radial(), 2.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const double x = g.center(0, i), y = g.center(1, 3);
    const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
    EXPECT_NEAR(eq.rho_eq_cell(i, 3), 1.0 - 0.5 * r2, 1e-15);
  }
}

TEST(Equilibrium, PotentialNames) {
  for (std::string n : {"zero", "linear", "quadratic", "sinusoidal", "sum-2d", "radial"})
    EXPECT_EQ(Potential::from_name(n).name(), n);
  EXPECT_THROW(Potential::from_name("cubic"), ConfigError);
}

TEST(BalancedVars, RoundTrip) {
  for (double rho : {0.3, 1.0, 2.7})
    for (double q : {-1.5, 0.0, 0.25}) {
      const auto w = to_balanced_vars(rho, q, 1.4, 0.8);
      const auto c = from_balanced_vars(w.w1, w.u, 1.4, 0.8);
      EXPECT_NEAR(c.rho, rho, 1e-14);
      EXPECT_NEAR(c.q, q, 1e-14);
    }
  EXPECT_THROW(to_balanced_vars(0.0, 1.0, 1.4, 1.0), NumericalError);
}

TEST(BalancedVars, EquilibriumHasUnitW1) {
  const auto eq = profile_1d(Potential::linear());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(to_balanced_vars(eq.rho_eq_cell(i), 0.0, eq, i).w1, 1.0);
}

TEST(LinearBalance, VanishesForMultiplesOfEquilibrium) {
  const auto eq = profile_1d(Potential::sinusoidal());
  const Grid& g = eq.grid();
  Field rho(g);
  for (int i = -2; i < 52; ++i) rho(i) = 1.7 * eq.rho_eq_cell(i);
  for (const Field& r : linear_balance_residual(rho, eq))
    for (int i = 0; i < 50; ++i) EXPECT_NEAR(r(i), 0.0, 1e-12);
  EXPECT_NEAR(balance_multiplier(rho, eq), 1.7, 1e-14);
}

TEST(LinearBalance, DetectsPerturbation) {
  const auto eq = profile_1d(Potential::linear());
  const Grid& g = eq.grid();
  Field rho(g);
  for (int i = -2; i < 52; ++i) rho(i) = eq.rho_eq_cell(i) + 0.01 * std::sin(6.0 * g.center(0, i));
  double m = 0.0;
  for (const Field& r : linear_balance_residual(rho, eq))
    for (int i = 0; i < 50; ++i) m = std::max(m, std::abs(r(i)));
  EXPECT_GT(m, 1e-3);
}
