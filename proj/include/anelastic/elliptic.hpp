/// @file elliptic.hpp
/// @brief Per-stage linear elliptic problem for the stage density.
///
/// Per direction d with c_d = nu_d^2 a_kk^2 / eps^2 the operator reads
///   (A rho)_i = rho_i - sum_d c_d [ (rho_{i+1} - 2 rho_i + rho_{i-1}) - (P_{i+1/2} - P_{i-1/2}) ],
///   P_{i+1/2} = 1/2 (rho_i/rho_eq,i + rho_{i+1}/rho_eq,i+1) (rho_eq,i+1 - rho_eq,i).
/// With r = rho/rho_eq and m_{i+1/2} = 1/2 (rho_eq,i + rho_eq,i+1) the bracket
/// equals m_{i+1/2} (r_{i+1} - r_i) - m_{i-1/2} (r_i - r_{i-1}); both the
/// matrix and the residual are built from this ratio form.
///
/// A is linear and A rho_eq = rho_eq + (dirichlet ghost terms), so the same
/// matrix also maps the deviation rho - rho_eq to b - rho_eq with no boundary
/// terms. The stepper solves for the deviation.
#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "anelastic/equilibrium.hpp"
#include "anelastic/mesh.hpp"

namespace anelastic {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Neighbour of interior cell `a` along an axis across one side, resolved
/// against the boundary condition.
struct FaceLink {
  enum Kind { interior, closed, known } kind = interior;
  int neighbour = 0;  // neighbour cell index along the axis (wrapped if periodic)
  double m = 0.0;     // 1/2 (rho_eq,a + rho_eq,neighbour)
};

struct EllipticOperator {
  Grid grid;
  BoundaryCondition bc;
  const EquilibriumProfile* profile = nullptr;
  std::array<double, 2> coeff{0.0, 0.0};
  SparseRowMatrix matrix;
  std::vector<double> rhs;
  std::vector<double> guess;  // predictor density, interior ordering
  bool deviation = false;     // unknown is rho - rho_eq

  std::size_t size() const { return grid.interior_count(); }
};

namespace detail {

/// Face between interior cell (i, j) and its neighbour on `side` (0 low, 1 high) of `axis`.
inline FaceLink face_link(const EquilibriumProfile& eq, const BoundaryCondition& bc, int axis,
                          int side, int i, int j) {
  const Grid& g = eq.grid();
  const int n = g.n(axis);
  const int a = axis == 0 ? i : j;
  const int b = side == 0 ? a - 1 : a + 1;
  FaceLink link;
  const double here = eq.rho_eq_cell(i, j);
  auto eq_at = [&](int c) { return axis == 0 ? eq.rho_eq_cell(c, j) : eq.rho_eq_cell(i, c); };
  if (b >= 0 && b < n) {
    link.kind = FaceLink::interior;
    link.neighbour = b;
    link.m = 0.5 * (here + eq_at(b));
    return link;
  }
  switch (bc.kind(axis, side)) {
    case BoundaryKind::periodic:
      link.kind = FaceLink::interior;
      link.neighbour = wrap(b, n);
      link.m = 0.5 * (here + eq_at(link.neighbour));
      break;
    case BoundaryKind::dirichlet_equilibrium:
      link.kind = FaceLink::known;
      link.neighbour = b;
      link.m = 0.5 * (here + eq_at(b));
      break;
    case BoundaryKind::no_flux:
    case BoundaryKind::extrapolation:
      link.kind = FaceLink::closed;
      link.neighbour = b;
      break;
  }
  return link;
}

}  // namespace detail

/// Operator matrix for coefficients c_d; depends only on the profile, the
/// boundary condition and c.
inline SparseRowMatrix elliptic_matrix(const EquilibriumProfile& eq, const BoundaryCondition& bc,
                                       std::array<double, 2> coeff) {
  const Grid& g = eq.grid();
  bc.validate(g.dim);
  const auto n = static_cast<Eigen::Index>(g.interior_count());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (1 + 2 * g.dim));
  for_each_interior(g, [&](int i, int j) {
    const auto row = static_cast<Eigen::Index>(g.interior_index(i, j));
    const double req = eq.rho_eq_cell(i, j);
    double diag = 1.0;
    for (int axis = 0; axis < g.dim; ++axis) {
      const double c = coeff[axis];
      for (int side = 0; side < 2; ++side) {
        const FaceLink link = detail::face_link(eq, bc, axis, side, i, j);
        if (link.kind == FaceLink::closed) continue;
        diag += c * link.m / req;
        if (link.kind == FaceLink::interior) {
          const int ni = axis == 0 ? link.neighbour : i, nj = axis == 0 ? j : link.neighbour;
          const auto col = static_cast<Eigen::Index>(g.interior_index(ni, nj));
          trip.emplace_back(row, col, -c * link.m / eq.rho_eq_cell(ni, nj));
        }
      }
    }
    trip.emplace_back(row, row, diag);
  });
  SparseRowMatrix A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

/// Assembles the stage problem from predictors with refreshed ghosts.
/// RHS: rho^ - a_kk sum_d nu_d (q^_{i+1} - q^_{i-1}) / 2, plus known
/// equilibrium ghost contributions at dirichlet-equilibrium faces.
namespace detail {

inline EllipticOperator assemble(const EquilibriumProfile& eq, const Field& unknown_hat,
                                 const std::array<Field, 2>& q_hat, double a_kk, double dt,
                                 double eps, const BoundaryCondition& bc, bool deviation) {
  if (!(a_kk > 0.0)) throw ConfigError("elliptic stage requires a positive diagonal coefficient");
  const Grid& g = eq.grid();
  EllipticOperator op;
  op.grid = g;
  op.bc = bc;
  op.profile = &eq;
  op.deviation = deviation;
  for (int axis = 0; axis < g.dim; ++axis) {
    const double nu = dt / g.dx(axis);
    op.coeff[axis] = nu * nu * a_kk * a_kk / (eps * eps);
  }
  op.matrix = elliptic_matrix(eq, bc, op.coeff);
  op.rhs.assign(g.interior_count(), 0.0);
  op.guess.assign(g.interior_count(), 0.0);
  for_each_interior(g, [&](int i, int j) {
    const std::size_t row = g.interior_index(i, j);
    const std::size_t k = g.index(i, j);
    double div = 0.0;
    for (int axis = 0; axis < g.dim; ++axis) {
      const auto s = g.stride(axis);
      div += dt / g.dx(axis) * (0.5 * (q_hat[axis].at_offset(k + s) - q_hat[axis].at_offset(k - s)));
    }
    double b = unknown_hat.at_offset(k) - a_kk * div;
    if (!deviation)
      for (int axis = 0; axis < g.dim; ++axis)
        for (int side = 0; side < 2; ++side) {
          const FaceLink link = detail::face_link(eq, bc, axis, side, i, j);
          if (link.kind == FaceLink::known) b += op.coeff[axis] * link.m;
        }
    op.rhs[row] = b;
    op.guess[row] = unknown_hat.at_offset(k);
  });
  return op;
}

}  // namespace detail

inline EllipticOperator assemble_elliptic(const EquilibriumProfile& eq, const Field& rho_hat,
                                          const std::array<Field, 2>& q_hat, double a_kk,
                                          double dt, double eps, const BoundaryCondition& bc) {
  return detail::assemble(eq, rho_hat, q_hat, a_kk, dt, eps, bc, false);
}

/// Same problem with the deviation rho - rho_eq as unknown:
/// RHS drho^ - a_kk sum_d nu_d (q^_{i+1} - q^_{i-1}) / 2.
inline EllipticOperator assemble_elliptic_deviation(const EquilibriumProfile& eq,
                                                    const Field& drho_hat,
                                                    const std::array<Field, 2>& q_hat,
                                                    double a_kk, double dt, double eps,
                                                    const BoundaryCondition& bc) {
  return detail::assemble(eq, drho_hat, q_hat, a_kk, dt, eps, bc, true);
}

/// b - A x evaluated in ratio form. Known (dirichlet) neighbours enter only
/// through the RHS, so the residual vanishes identically at x = rho_eq
/// (x = 0 for the deviation form).
inline std::vector<double> ratio_residual(const EllipticOperator& op, const std::vector<double>& x) {
  const Grid& g = op.grid;
  const EquilibriumProfile& eq = *op.profile;
  std::vector<double> res(x.size());
  for_each_interior(g, [&](int i, int j) {
    const std::size_t row = g.interior_index(i, j);
    const double r_here = x[row] / eq.rho_eq_cell(i, j);
    double flux = 0.0;
    for (int axis = 0; axis < g.dim; ++axis) {
      double dsum = 0.0;
      for (int side = 0; side < 2; ++side) {
        const FaceLink link = detail::face_link(eq, op.bc, axis, side, i, j);
        double r_there;
        if (link.kind == FaceLink::closed) continue;
        if (link.kind == FaceLink::known) {
          // The known ghost value is already in the RHS.
          r_there = 0.0;
        } else {
          const int ni = axis == 0 ? link.neighbour : i, nj = axis == 0 ? j : link.neighbour;
          r_there = x[g.interior_index(ni, nj)] / eq.rho_eq_cell(ni, nj);
        }
        dsum += link.m * (r_there - r_here);
      }
      flux += op.coeff[axis] * dsum;
    }
    res[row] = (op.rhs[row] - x[row]) + flux;
  });
  return res;
}

namespace detail {

/// Tridiagonal solve without pivoting; the elliptic matrix is strictly
/// diagonally dominant by columns.
inline void thomas(std::vector<double> lo, std::vector<double> diag, std::vector<double> up,
                   std::vector<double>& x) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lo[i] / diag[i - 1];
    diag[i] -= w * up[i - 1];
    x[i] -= w * x[i - 1];
  }
  x[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - up[i] * x[i + 1]) / diag[i];
}

/// Cyclic tridiagonal solve by Sherman-Morrison; `corner_lo` = A(n-1, 0),
/// `corner_up` = A(0, n-1).
inline void cyclic_thomas(const std::vector<double>& lo, const std::vector<double>& diag,
                          const std::vector<double>& up, double corner_lo, double corner_up,
                          std::vector<double>& x) {
  const std::size_t n = diag.size();
  const double gam = -diag[0];
  std::vector<double> bb = diag;
  bb[0] = diag[0] - gam;
  bb[n - 1] = diag[n - 1] - corner_lo * corner_up / gam;
  thomas(lo, bb, up, x);
  std::vector<double> z(n, 0.0);
  z[0] = gam;
  z[n - 1] = corner_lo;
  thomas(lo, bb, up, z);
  const double fact = (x[0] + corner_up * x[n - 1] / gam) / (1.0 + z[0] + corner_up * z[n - 1] / gam);
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
}

}  // namespace detail

/// Factorization reused across stages and steps while the coefficients are unchanged.
struct EllipticCache {
  std::array<double, 2> coeff{-1.0, -1.0};
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>> lu;
  int factorizations = 0;
};

struct EllipticResult {
  Field rho;
  Field deviation;  // rho - rho_eq
  double relative_residual = 0.0;  // ||A x - b|| / ||b||
  double backward_error = 0.0;     // ||A x - b|| / (||A|| ||x|| + ||b||), infinity norms
  int corrections = 0;
};

namespace detail {

inline bool use_banded(const EllipticOperator& op) {
  return op.grid.dim == 1 && op.grid.n(0) >= 3;
}

/// Solves A d = r for the correction d.
inline std::vector<double> apply_inverse(const EllipticOperator& op, const std::vector<double>& r,
                                         EllipticCache* cache) {
  std::vector<double> d = r;
  if (use_banded(op)) {
    const std::size_t n = op.size();
    std::vector<double> lo(n, 0.0), diag(n, 0.0), up(n, 0.0);
    double corner_lo = 0.0, corner_up = 0.0;
    for (Eigen::Index row = 0; row < op.matrix.outerSize(); ++row)
      for (SparseRowMatrix::InnerIterator it(op.matrix, row); it; ++it) {
        const auto col = it.col();
        if (col == row) diag[row] = it.value();
        else if (col == row - 1) lo[row] = it.value();
        else if (col == row + 1) up[row] = it.value();
        else if (row == 0 && col == static_cast<Eigen::Index>(n) - 1) corner_up = it.value();
        else if (row == static_cast<Eigen::Index>(n) - 1 && col == 0) corner_lo = it.value();
      }
    if (op.bc.periodic(0)) cyclic_thomas(lo, diag, up, corner_lo, corner_up, d);
    else thomas(lo, diag, up, d);
    return d;
  }
  EllipticCache local;
  EllipticCache& c = cache != nullptr ? *cache : local;
  if (!c.lu || c.coeff != op.coeff) {
    c.lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>();
    Eigen::SparseMatrix<double> colmajor = op.matrix;
    c.lu->analyzePattern(colmajor);
    c.lu->factorize(colmajor);
    if (c.lu->info() != Eigen::Success) {
      c.lu.reset();
      throw NumericalError("elliptic factorization failed (boundary " +
                           to_string(op.bc.kind(0, 0)) + "): singular matrix");
    }
    c.coeff = op.coeff;
    ++c.factorizations;
  }
  Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
  Eigen::VectorXd sol = c.lu->solve(rv);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = sol[static_cast<Eigen::Index>(i)];
  return d;
}

inline double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// Solves the assembled problem by defect correction from the predictor:
/// x = guess + A^{-1} (b - A guess), repeated while the backward error exceeds `tol`.
inline EllipticResult solve(const EllipticOperator& op, EllipticCache* cache = nullptr,
                            double tol = 1e-12, int max_corrections = 3) {
  std::vector<double> x = op.guess;
  EllipticResult out;
  double a_norm = 0.0;
  for (Eigen::Index row = 0; row < op.matrix.outerSize(); ++row) {
    double s = 0.0;
    for (SparseRowMatrix::InnerIterator it(op.matrix, row); it; ++it) s += std::abs(it.value());
    a_norm = std::max(a_norm, s);
  }
  const double b_norm = detail::inf_norm(op.rhs);
  std::vector<double> res = ratio_residual(op, x);
  auto measure = [&](const std::vector<double>& r) {
    const double rn = detail::inf_norm(r);
    out.relative_residual = b_norm > 0.0 ? rn / b_norm : rn;
    const double scale = a_norm * detail::inf_norm(x) + b_norm;
    out.backward_error = scale > 0.0 ? rn / scale : rn;
  };
  measure(res);
  while (out.backward_error > 0.0 && out.corrections < max_corrections) {
    if (out.corrections > 0 && out.backward_error <= tol) break;
    const std::vector<double> d = detail::apply_inverse(op, res, cache);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += d[i];
    ++out.corrections;
    res = ratio_residual(op, x);
    measure(res);
  }
  for (double v : x)
    if (!std::isfinite(v)) throw NumericalError("elliptic solve produced a non-finite density");
  if (out.backward_error > tol) {
    std::ostringstream os;
    os << "elliptic solve did not converge: backward error " << out.backward_error
       << ", relative residual " << out.relative_residual;
    throw NumericalError(os.str());
  }
  out.rho = Field(op.grid);
  out.deviation = Field(op.grid);
  const EquilibriumProfile& eq = *op.profile;
  for_each_interior(op.grid, [&](int i, int j) {
    const double v = x[op.grid.interior_index(i, j)];
    const double e = eq.rho_eq_cell(i, j);
    out.rho(i, j) = op.deviation ? e + v : v;
    out.deviation(i, j) = op.deviation ? v : v - e;
  });
  return out;
}

}  // namespace anelastic
