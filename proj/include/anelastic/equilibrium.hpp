/// @file equilibrium.hpp
/// @brief Gravitational potentials, the isentropic hydrostatic equilibrium and
/// its H-transform, balance-preserving variables and balance residuals.
///
/// For p = rho^gamma and a potential phi the hydrostatic density is
///   rho_eq = (C0 - (gamma-1)/gamma * phi)^(1/(gamma-1)),
/// and with beta = gamma/(gamma-1) * C0 the transform
///   H = gamma/(gamma-1) * log((gamma-1)/gamma * (beta - phi))
/// satisfies e^H = rho_eq^gamma = p_eq, so p e^{-H} is constant at rest.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "anelastic/mesh.hpp"

namespace anelastic {

enum class PotentialKind { zero, linear, quadratic, sinusoidal, sum2d, radial, tabulated, custom };

/// Closed-form or tabulated gravitational potential phi(x1, x2).
class Potential {
 public:
  Potential() = default;

  static Potential zero() { return Potential(PotentialKind::zero, "zero"); }
  /// phi = x1
  static Potential linear() { return Potential(PotentialKind::linear, "linear"); }
  /// phi = x1^2
  static Potential quadratic() { return Potential(PotentialKind::quadratic, "quadratic"); }
  /// phi = sin(2 pi x1)
  static Potential sinusoidal() { return Potential(PotentialKind::sinusoidal, "sinusoidal"); }
  /// phi = x1 + x2
  static Potential sum2d() { return Potential(PotentialKind::sum2d, "sum-2d"); }
  /// phi = (x1 - 1/2)^2 + (x2 - 1/2)^2
  static Potential radial() { return Potential(PotentialKind::radial, "radial"); }

  /// Piecewise-linear interpolation in x1 of samples (nodes strictly increasing);
  /// constant extension outside the sampled range.
  static Potential tabulated(std::vector<double> nodes, std::vector<double> values) {
    if (nodes.size() < 2 || nodes.size() != values.size())
      throw ConfigError("tabulated potential needs at least two (node, value) pairs");
    for (std::size_t k = 1; k < nodes.size(); ++k)
      if (!(nodes[k] > nodes[k - 1])) throw ConfigError("tabulated potential nodes must increase");
    Potential p(PotentialKind::tabulated, "tabulated");
    p.nodes_ = std::move(nodes);
    p.values_ = std::move(values);
    return p;
  }

  static Potential custom(std::function<double(double, double)> fn, std::string name = "custom") {
    Potential p(PotentialKind::custom, std::move(name));
    p.fn_ = std::move(fn);
    return p;
  }

  static Potential from_name(const std::string& s) {
    if (s == "zero" || s == "none") return zero();
    if (s == "linear" || s == "x") return linear();
    if (s == "quadratic" || s == "x^2") return quadratic();
    if (s == "sinusoidal" || s == "sin") return sinusoidal();
    if (s == "sum-2d" || s == "sum2d") return sum2d();
    if (s == "radial" || s == "r^2") return radial();
    throw ConfigError("unknown potential '" + s +
                      "' (expected zero, linear, quadratic, sinusoidal, sum-2d, radial)");
  }

  PotentialKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  double operator()(double x1, double x2 = 0.0) const {
    switch (kind_) {
      case PotentialKind::zero: return 0.0;
      case PotentialKind::linear: return x1;
      case PotentialKind::quadratic: return x1 * x1;
      case PotentialKind::sinusoidal: return std::sin(2.0 * std::numbers::pi * x1);
      case PotentialKind::sum2d: return x1 + x2;
      case PotentialKind::radial: {
        const double a = x1 - 0.5, b = x2 - 0.5;
        return a * a + b * b;
      }
      case PotentialKind::tabulated: return interpolate(x1);
      case PotentialKind::custom: return fn_(x1, x2);
    }
    return 0.0;
  }

  /// Analytic gradient for the closed-form kinds (finite differences otherwise).
  std::array<double, 2> gradient(double x1, double x2 = 0.0) const {
    switch (kind_) {
      case PotentialKind::zero: return {0.0, 0.0};
      case PotentialKind::linear: return {1.0, 0.0};
      case PotentialKind::quadratic: return {2.0 * x1, 0.0};
      case PotentialKind::sinusoidal:
        return {2.0 * std::numbers::pi * std::cos(2.0 * std::numbers::pi * x1), 0.0};
      case PotentialKind::sum2d: return {1.0, 1.0};
      case PotentialKind::radial: return {2.0 * (x1 - 0.5), 2.0 * (x2 - 0.5)};
      default: {
        const double h = 1e-6;
        return {((*this)(x1 + h, x2) - (*this)(x1 - h, x2)) / (2 * h),
                ((*this)(x1, x2 + h) - (*this)(x1, x2 - h)) / (2 * h)};
      }
    }
  }

 private:
  Potential(PotentialKind k, std::string name) : kind_(k), name_(std::move(name)) {}

  double interpolate(double x) const {
    if (x <= nodes_.front()) return values_.front();
    if (x >= nodes_.back()) return values_.back();
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - nodes_.begin());
    const double t = (x - nodes_[k - 1]) / (nodes_[k] - nodes_[k - 1]);
    return (1.0 - t) * values_[k - 1] + t * values_[k];
  }

  PotentialKind kind_ = PotentialKind::zero;
  std::string name_ = "zero";
  std::vector<double> nodes_, values_;
  std::function<double(double, double)> fn_;
};

/// Pointwise closed forms shared by the profile and the free functions.
struct EquilibriumLaw {
  double gamma = 1.4;
  double c0 = 1.0;

  double beta() const { return gamma / (gamma - 1.0) * c0; }

  /// C0 - (gamma-1)/gamma * phi, validated positive.
  double base(double phi, double x1 = 0.0, double x2 = 0.0) const {
    const double b = c0 - (gamma - 1.0) / gamma * phi;
    if (!(b > 0.0)) {
      std::ostringstream os;
      os << "non-positive equilibrium radicand " << b << " at point (" << x1 << ", " << x2
         << "); C0 too small for this potential";
      throw ConfigError(os.str());
    }
    return b;
  }
  double rho_eq(double phi, double x1 = 0.0, double x2 = 0.0) const {
    return std::pow(base(phi, x1, x2), 1.0 / (gamma - 1.0));
  }
  double h(double phi, double x1 = 0.0, double x2 = 0.0) const {
    const double arg = (gamma - 1.0) / gamma * (beta() - phi);
    if (!(arg > 0.0)) {
      std::ostringstream os;
      os << "non-positive log argument in H at point (" << x1 << ", " << x2 << ")";
      throw ConfigError(os.str());
    }
    return gamma / (gamma - 1.0) * std::log(arg);
  }
  double exp_h(double phi, double x1 = 0.0, double x2 = 0.0) const {
    const double arg = (gamma - 1.0) / gamma * (beta() - phi);
    if (!(arg > 0.0)) {
      std::ostringstream os;
      os << "non-positive H-transform base at point (" << x1 << ", " << x2 << ")";
      throw ConfigError(os.str());
    }
    return std::pow(arg, gamma / (gamma - 1.0));
  }
};

/// Tabulated hydrostatic equilibrium on a grid: phi, rho_eq and e^H at every
/// cell centre (ghosts included) and at every interior face.
///
/// The tabulated e^H is computed as rho_eq^gamma from the closed-form rho_eq,
/// which agrees with the direct formula to rounding and makes p_eq e^{-H} = 1
/// hold bitwise. Along periodic axes the ghost entries copy the wrapped
/// interior values.
class EquilibriumProfile : public GhostEquilibrium {
 public:
  EquilibriumProfile() = default;

  EquilibriumProfile(const Grid& grid, Potential potential, double gamma, double c0 = 1.0,
                     std::array<bool, 2> periodic = {false, false})
      : grid_(grid), potential_(std::move(potential)), law_{gamma, c0} {
    if (!(gamma > 1.0)) throw ConfigError("isentropic exponent gamma must exceed 1");
    periodic_ = periodic;
    tabulate();
  }

  EquilibriumProfile(const Grid& grid, Potential potential, double gamma, double c0,
                     const BoundaryCondition& bc)
      : EquilibriumProfile(grid, std::move(potential), gamma, c0,
                           {bc.periodic(0), grid.dim == 2 && bc.periodic(1)}) {}

  const Grid& grid() const { return grid_; }
  const Potential& potential() const { return potential_; }
  const EquilibriumLaw& law() const { return law_; }
  double gamma() const { return law_.gamma; }
  double c0() const { return law_.c0; }
  double beta() const { return law_.beta(); }

  double rho_eq_cell(int i, int j = 0) const override { return rho_c_[grid_.index(i, j)]; }
  double exp_h_cell(int i, int j = 0) const { return eh_c_[grid_.index(i, j)]; }
  double phi_cell(int i, int j = 0) const { return phi_c_[grid_.index(i, j)]; }
  double h_cell(int i, int j = 0) const { return std::log(exp_h_cell(i, j)); }

  /// Face f along `axis` (0..n), at transverse interior index t.
  double rho_eq_face(int axis, int f, int t = 0) const { return rho_f_[axis][face_slot(axis, f, t)]; }
  double exp_h_face(int axis, int f, int t = 0) const { return eh_f_[axis][face_slot(axis, f, t)]; }
  double phi_face(int axis, int f, int t = 0) const { return phi_f_[axis][face_slot(axis, f, t)]; }

  std::size_t face_slot(int axis, int f, int t) const {
    if (axis == 0) return static_cast<std::size_t>(f) * transverse(0) + t;
    return static_cast<std::size_t>(t) * (grid_.n(1) + 1) + f;
  }
  int transverse(int axis) const {
    if (grid_.dim == 1) return 1;
    return axis == 0 ? grid_.n(1) : grid_.n(0);
  }

  /// Storage-aligned centre tabulations (same layout as Field).
  std::span<const double> rho_eq_storage() const { return rho_c_; }
  std::span<const double> exp_h_storage() const { return eh_c_; }
  std::span<const double> phi_storage() const { return phi_c_; }

  Field rho_eq_field() const {
    Field f(grid_);
    std::copy(rho_c_.begin(), rho_c_.end(), f.raw().begin());
    return f;
  }

 private:
  void tabulate() {
    const Grid& g = grid_;
    const std::size_t sz = g.storage_size();
    phi_c_.assign(sz, 0.0);
    rho_c_.assign(sz, 0.0);
    eh_c_.assign(sz, 0.0);
    const int gx = Grid::ghost, gy = g.dim == 2 ? Grid::ghost : 0;
    const int ny = g.dim == 2 ? g.n(1) : 1;
    for (int i = -gx; i < g.n(0) + gx; ++i) {
      for (int j = -gy; j < ny + gy; ++j) {
        int si = i, sj = j;
        if (periodic_[0]) si = detail::wrap(i, g.n(0));
        if (g.dim == 2 && periodic_[1]) sj = detail::wrap(j, g.n(1));
        const double x1 = g.center(0, si);
        const double x2 = g.dim == 2 ? g.center(1, sj) : 0.0;
        const double phi = potential_(x1, x2);
        const double rho = law_.rho_eq(phi, x1, x2);
        const std::size_t k = g.index(i, j);
        phi_c_[k] = phi;
        rho_c_[k] = rho;
        eh_c_[k] = std::pow(rho, law_.gamma);
      }
    }
    for (int axis = 0; axis < g.dim; ++axis) {
      const int nf = g.n(axis) + 1;
      const int nt = transverse(axis);
      phi_f_[axis].assign(static_cast<std::size_t>(nf) * nt, 0.0);
      rho_f_[axis].assign(phi_f_[axis].size(), 0.0);
      eh_f_[axis].assign(phi_f_[axis].size(), 0.0);
      for (int f = 0; f < nf; ++f) {
        for (int t = 0; t < nt; ++t) {
          double x1, x2 = 0.0;
          if (axis == 0) {
            x1 = g.face(0, f);
            if (g.dim == 2) x2 = g.center(1, t);
          } else {
            x1 = g.center(0, t);
            x2 = g.face(1, f);
          }
          const double phi = potential_(x1, x2);
          const double rho = law_.rho_eq(phi, x1, x2);
          const std::size_t k = face_slot(axis, f, t);
          phi_f_[axis][k] = phi;
          rho_f_[axis][k] = rho;
          eh_f_[axis][k] = std::pow(rho, law_.gamma);
        }
      }
    }
  }

  Grid grid_;
  Potential potential_;
  EquilibriumLaw law_;
  std::array<bool, 2> periodic_{false, false};
  std::vector<double> phi_c_, rho_c_, eh_c_;
  std::array<std::vector<double>, 2> phi_f_, rho_f_, eh_f_;
};

inline double rho_eq_at(const EquilibriumProfile& profile, double x1, double x2 = 0.0) {
  return profile.law().rho_eq(profile.potential()(x1, x2), x1, x2);
}

inline double h_at(const EquilibriumProfile& profile, double x1, double x2 = 0.0) {
  return profile.law().h(profile.potential()(x1, x2), x1, x2);
}

/// e^H from ((gamma-1)/gamma (beta - phi))^(gamma/(gamma-1)), not via exp(log).
inline double exp_h_at(const EquilibriumProfile& profile, double x1, double x2 = 0.0) {
  return profile.law().exp_h(profile.potential()(x1, x2), x1, x2);
}

/// Balance-preserving variables (w1, u) = (p e^{-H}, q / rho).
struct BalancedVars {
  double w1;
  double u;
};

struct ConservedVars {
  double rho;
  double q;
};

/// w1 = rho^gamma / e^H and u = q / rho.
inline BalancedVars to_balanced_vars(double rho, double q, double gamma, double exp_h) {
  if (!(rho > 0.0)) throw NumericalError("to_balanced_vars: non-positive density");
  return {std::pow(rho, gamma) / exp_h, q / rho};
}

/// Inverse: p = e^H w1, rho = p^(1/gamma), q = rho u.
inline ConservedVars from_balanced_vars(double w1, double u, double gamma, double exp_h) {
  const double p = exp_h * w1;
  if (!(p > 0.0)) throw NumericalError("from_balanced_vars: non-positive pressure");
  const double rho = std::pow(p, 1.0 / gamma);
  return {rho, rho * u};
}

inline BalancedVars to_balanced_vars(double rho, double q, const EquilibriumProfile& profile,
                                     int i, int j = 0) {
  return to_balanced_vars(rho, q, profile.gamma(), profile.exp_h_cell(i, j));
}

inline ConservedVars from_balanced_vars(double w1, double u, const EquilibriumProfile& profile,
                                        int i, int j = 0) {
  return from_balanced_vars(w1, u, profile.gamma(), profile.exp_h_cell(i, j));
}

/// Per-direction residual of grad(rho) - (rho/rho_eq) grad(rho_eq) by central
/// differences on interior cells; ghosts of `rho` must be refreshed.
inline std::vector<Field> linear_balance_residual(const Field& rho,
                                                  const EquilibriumProfile& profile) {
  const Grid& g = rho.grid();
  std::vector<Field> out;
  for (int axis = 0; axis < g.dim; ++axis) {
    Field r(g);
    const auto s = g.stride(axis);
    const auto eq = profile.rho_eq_storage();
    for_each_interior(g, [&](int i, int j) {
      const std::size_t k = g.index(i, j);
      const double drho = 0.5 * (rho.at_offset(k + s) - rho.at_offset(k - s));
      const double deq = 0.5 * (eq[k + s] - eq[k - s]);
      r(i, j) = (drho - rho.at_offset(k) / eq[k] * deq) / g.dx(axis);
    });
    out.push_back(std::move(r));
  }
  return out;
}

/// Least-squares multiplier K in rho ~ K rho_eq over the interior.
inline double balance_multiplier(const Field& rho, const EquilibriumProfile& profile) {
  double num = 0.0, den = 0.0;
  for_each_interior(rho.grid(), [&](int i, int j) {
    const double e = profile.rho_eq_cell(i, j);
    num += rho(i, j) * e;
    den += e * e;
  });
  return num / den;
}

}  // namespace anelastic
