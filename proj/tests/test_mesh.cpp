#include <gtest/gtest.h>

#include "anelastic.hpp"

using namespace anelastic;

namespace {

struct RampEquilibrium : GhostEquilibrium {
  double rho_eq_cell(int i, int j) const override { return 2.0 + 0.1 * i + 0.01 * j; }
};

Field ramp(const Grid& g) {
  Field f(g);
  for_each_interior(g, [&](int i, int j) { f(i, j) = 1.0 + i + 10.0 * j; });
  return f;
}

}  // namespace

TEST(Grid, CentresAndSpacing) {
  const Grid g = Grid::line(0.0, 1.0, 8);
  EXPECT_DOUBLE_EQ(g.dx(0), 0.125);
  EXPECT_DOUBLE_EQ(g.center(0, 0), 0.0625);
  EXPECT_DOUBLE_EQ(g.center(0, 7), 0.9375);
  EXPECT_DOUBLE_EQ(g.face(0, 8), 1.0);
  EXPECT_EQ(g.interior_count(), 8u);
  EXPECT_EQ(g.storage_size(), 12u);
}

TEST(Grid, StorageIndexIsStridedAlongBothAxes) {
  const Grid g = Grid::rectangle({0.0, 0.0}, {1.0, 2.0}, {4, 5});
  EXPECT_DOUBLE_EQ(g.dx(1), 0.4);
  EXPECT_EQ(g.index(1, 0) - g.index(0, 0), static_cast<std::size_t>(g.stride(0)));
  EXPECT_EQ(g.index(0, 1) - g.index(0, 0), static_cast<std::size_t>(g.stride(1)));
  EXPECT_EQ(g.interior_index(3, 4), 19u);
}

TEST(Grid, RejectsEmptyExtent) {
  EXPECT_THROW(Grid::line(1.0, 1.0, 4), ConfigError);
  EXPECT_THROW(Grid::line(0.0, 1.0, 0), ConfigError);
}

TEST(Boundary, PeriodicWraps) {
  const Grid g = Grid::line(0.0, 1.0, 6);
  Field f = ramp(g);
  apply_boundary(f, BoundaryCondition::uniform(BoundaryKind::periodic), FieldRole::scalar);
  EXPECT_EQ(f(-1), f(5));
  EXPECT_EQ(f(-2), f(4));
  EXPECT_EQ(f(6), f(0));
  EXPECT_EQ(f(7), f(1));
}

TEST(Boundary, ExtrapolationCopiesEdge) {
  const Grid g = Grid::line(0.0, 1.0, 6);
  Field f = ramp(g);
  apply_boundary(f, BoundaryCondition::uniform(BoundaryKind::extrapolation), FieldRole::momentum_x1);
  EXPECT_EQ(f(-2), f(0));
  EXPECT_EQ(f(7), f(5));
}

TEST(Boundary, NoFluxNegatesNormalMomentumOnly) {
  const Grid g = Grid::rectangle({0.0, 0.0}, {1.0, 1.0}, {4, 4});
  const auto bc = BoundaryCondition::uniform(BoundaryKind::no_flux);
  Field qx = ramp(g), qy = ramp(g);
  apply_boundary(qx, bc, FieldRole::momentum_x1);
  apply_boundary(qy, bc, FieldRole::momentum_x2);
  EXPECT_EQ(qx(-1, 2), -qx(0, 2));
  EXPECT_EQ(qx(-2, 2), -qx(1, 2));
  EXPECT_EQ(qx(2, -1), qx(2, 0));
  EXPECT_EQ(qy(2, 4), -qy(2, 3));
  EXPECT_EQ(qy(4, 2), qy(3, 2));
}

TEST(Boundary, NoFluxDensityMirrorsRatioWithEquilibrium) {
  const Grid g = Grid::line(0.0, 1.0, 5);
  const RampEquilibrium eq;
  Field rho = ramp(g);
  apply_boundary(rho, BoundaryCondition::uniform(BoundaryKind::no_flux), FieldRole::density, &eq);
  EXPECT_NEAR(rho(-1) / eq.rho_eq_cell(-1, 0), rho(0) / eq.rho_eq_cell(0, 0), 1e-15);
  EXPECT_NEAR(rho(6) / eq.rho_eq_cell(6, 0), rho(3) / eq.rho_eq_cell(3, 0), 1e-15);
}

TEST(Boundary, DirichletNeedsEquilibrium) {
  const Grid g = Grid::line(0.0, 1.0, 5);
  Field rho = ramp(g);
  const auto bc = BoundaryCondition::uniform(BoundaryKind::dirichlet_equilibrium);
  EXPECT_THROW(apply_boundary(rho, bc, FieldRole::density), ConfigError);
  const RampEquilibrium eq;
  Field q = ramp(g);
  apply_boundary(rho, bc, FieldRole::density, &eq);
  apply_boundary(q, bc, FieldRole::momentum_x1, &eq);
  EXPECT_EQ(rho(-1), eq.rho_eq_cell(-1, 0));
  EXPECT_EQ(q(5), 0.0);
}

TEST(Boundary, PeriodicMustPair) {
  BoundaryCondition bc = BoundaryCondition::uniform(BoundaryKind::periodic);
  bc.sides[0][1] = BoundaryKind::no_flux;
  EXPECT_THROW(bc.validate(1), ConfigError);
}

TEST(Boundary, DeviationGhostsMatchDensityGhosts) {
  const Grid g = Grid::line(0.0, 1.0, 6);
  const RampEquilibrium eq;
  for (auto kind : {BoundaryKind::periodic, BoundaryKind::extrapolation, BoundaryKind::no_flux,
                    BoundaryKind::dirichlet_equilibrium}) {
    const auto bc = BoundaryCondition::uniform(kind);
    Field rho = ramp(g), drho(g);
    for (int i = 0; i < 6; ++i) drho(i) = rho(i) - eq.rho_eq_cell(i, 0);
    apply_boundary(rho, bc, FieldRole::density, &eq);
    apply_boundary_deviation(drho, bc, eq);
    for (int i : {-2, -1, 6, 7})
      EXPECT_NEAR(eq.rho_eq_cell(i, 0) + drho(i), rho(i), 1e-14) << to_string(kind) << " ghost " << i;
  }
}

TEST(Boundary, KindNamesRoundTrip) {
  for (auto kind : {BoundaryKind::periodic, BoundaryKind::extrapolation, BoundaryKind::no_flux,
                    BoundaryKind::dirichlet_equilibrium})
    EXPECT_EQ(boundary_kind_from_string(to_string(kind)), kind);
  EXPECT_THROW(boundary_kind_from_string("sticky"), ConfigError);
}

TEST(FaceOperators, DeltaAndMean) {
  const std::vector<double> faces{1.0, 4.0, 9.0, 16.0};
  const auto d = delta(faces);
  const auto m = mu(faces);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0], 3.0);
  EXPECT_EQ(d[2], 7.0);
  EXPECT_EQ(m[1], 6.5);
  EXPECT_THROW(delta(std::vector<double>{1.0}), std::invalid_argument);
}
