/// @file stepper.hpp
/// @brief The linearly implicit IMEX-RK time integrator, time-step control,
/// step diagnostics and initial-data generators.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "anelastic/elliptic.hpp"
#include "anelastic/equilibrium.hpp"
#include "anelastic/imex.hpp"
#include "anelastic/mesh.hpp"
#include "anelastic/spatial.hpp"

namespace anelastic {

/// cfl: dt max_cells sum_d |2 q_d/rho| / dx_d = value, with `fallback` dx at rest.
/// fixed: dt = value * dx.
struct DtPolicy {
  enum Kind { cfl, fixed } kind = fixed;
  double value = 0.5;
  double fallback = 0.5;

  static DtPolicy cfl_number(double nu, double fallback = 0.5) { return {cfl, nu, fallback}; }
  static DtPolicy fixed_ratio(double c) { return {fixed, c, c}; }

  /// Parses "cfl:0.9" or "fixed:0.5".
  static DtPolicy parse(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ConfigError("dt policy must be cfl:<nu> or fixed:<c>, got '" + s + "'");
    const std::string kind = s.substr(0, colon);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(s.substr(colon + 1), &used);
      if (used != s.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("dt policy value is not a number in '" + s + "'");
    }
    if (!(v > 0.0)) throw ConfigError("dt policy value must be positive in '" + s + "'");
    if (kind == "cfl") return cfl_number(v);
    if (kind == "fixed") return fixed_ratio(v);
    throw ConfigError("dt policy must be cfl:<nu> or fixed:<c>, got '" + s + "'");
  }
  std::string str() const {
    std::ostringstream os;
    os.precision(17);
    os << (kind == cfl ? "cfl:" : "fixed:") << value;
    return os.str();
  }
};

struct StepperConfig {
  double eps = 1.0;
  ImexTableau tableau = builtin_tableau("DP2-A(2,4,2)", 0.7);
  BoundaryCondition bc = BoundaryCondition::uniform(BoundaryKind::no_flux);
  SpatialOptions spatial;
  DtPolicy dt;
};

struct StepReport {
  double dt = 0.0;
  std::vector<double> elliptic_backward_error;
  std::vector<double> elliptic_relative_residual;
  double max_speed = 0.0;
  double cfl = 0.0;  // realised dt max sum_d |2u_d|/dx_d
};

/// Largest sum_d |2 q_d / rho| / dx_d over interior cells.
inline double max_signal(const State& s) {
  const Grid& g = s.grid();
  double m = 0.0;
  for_each_interior(g, [&](int i, int j) {
    double sum = 0.0;
    for (int d = 0; d < g.dim; ++d) sum += std::abs(2.0 * s.q[d](i, j) / s.rho(i, j)) / g.dx(d);
    m = std::max(m, sum);
  });
  return m;
}

inline double max_speed(const State& s) {
  const Grid& g = s.grid();
  double m = 0.0;
  for_each_interior(g, [&](int i, int j) {
    double u2 = 0.0;
    for (int d = 0; d < g.dim; ++d) u2 += std::pow(s.q[d](i, j) / s.rho(i, j), 2);
    m = std::max(m, std::sqrt(u2));
  });
  return m;
}

/// Time step from the policy; independent of eps.
inline double compute_dt(const State& s, const DtPolicy& policy) {
  const double h = s.grid().min_spacing();
  if (policy.kind == DtPolicy::fixed) return policy.value * h;
  const double lam = max_signal(s);
  if (lam < 1e-12) return policy.fallback * h;
  return policy.value / lam;
}

/// Throws NumericalError naming the first offending interior cell.
inline void check_state(const State& s, const std::string& where) {
  const Grid& g = s.grid();
  for_each_interior(g, [&](int i, int j) {
    const double r = s.rho(i, j);
    bool ok = std::isfinite(r) && r > 0.0;
    for (int d = 0; d < g.dim; ++d) ok = ok && std::isfinite(s.q[d](i, j));
    if (!ok) {
      std::ostringstream os;
      os << where << ": ";
      if (!std::isfinite(r)) os << "non-finite density";
      else if (!(r > 0.0)) os << "non-positive density " << r;
      else os << "non-finite momentum";
      os << " at cell (" << i;
      if (g.dim == 2) os << ", " << j;
      os << ")";
      throw NumericalError(os.str());
    }
  });
}

/// y^{n+1} assembled from the weights instead of the last stage:
/// rho - rho_eq = (rho^n - rho_eq) - sum w_l M_l, q = q^n - sum w~_l E_l - sum w_l I_l.
inline State weighted_update(const State& base, const EquilibriumProfile& eq,
                             const std::vector<StageTendency>& cache, const ImexTableau& tab) {
  if (cache.size() != tab.stages) throw std::logic_error("weighted update needs every stage tendency");
  const Grid& g = base.grid();
  const auto req = eq.rho_eq_storage();
  State out = base;
  for_each_interior(g, [&](int i, int j) {
    const std::size_t c = g.index(i, j);
    double r = density_deviation(base, req, c);
    for (std::size_t l = 0; l < tab.stages; ++l)
      if (tab.implicit_weights[l] != 0.0) r -= tab.implicit_weights[l] * cache[l].mass.at_offset(c);
    set_density_deviation(out, eq, c, r);
    for (int comp = 0; comp < g.dim; ++comp) {
      double q = base.q[comp].at_offset(c);
      for (std::size_t l = 0; l < tab.stages; ++l) {
        const double we = tab.explicit_weights[l], wi = tab.implicit_weights[l];
        if (we != 0.0) q -= we * cache[l].mom_explicit[comp].at_offset(c);
        if (wi != 0.0) q -= wi * cache[l].mom_implicit[comp].at_offset(c);
      }
      out.q[comp].at_offset(c) = q;
    }
  });
  return out;
}

class Stepper {
 public:
  Stepper(const EquilibriumProfile& eq, StepperConfig cfg) : eq_(&eq), cfg_(std::move(cfg)) {
    cfg_.tableau.validate();
    if (!classify(cfg_.tableau).gsa)
      throw ConfigError("tableau '" + cfg_.tableau.name + "' is not globally stiffly accurate");
    if (!(cfg_.eps > 0.0)) throw ConfigError("eps must be positive");
    cfg_.bc.validate(eq.grid().dim);
  }

  const StepperConfig& config() const { return cfg_; }
  const EquilibriumProfile& profile() const { return *eq_; }

  /// Keep the tendency of the final stage too (only needed for weighted_update checks).
  void keep_final_tendency(bool on) { keep_final_ = on; }
  const std::vector<StageTendency>& tendencies() const { return cache_; }
  const std::vector<State>& stages() const { return stages_; }
  const EllipticCache& elliptic_cache() const { return lu_; }

  double compute_dt(const State& s) const { return anelastic::compute_dt(s, cfg_.dt); }

  /// Advances `s` by dt; on success `s` holds the last stage. Ghosts of `s`
  /// are refreshed on entry.
  StepReport step(State& s, double dt) {
    if (!(dt > 0.0)) throw NumericalError("time step must be positive");
    const ImexTableau& tab = cfg_.tableau;
    const EquilibriumProfile& eq = *eq_;
    const Grid& g = s.grid();
    const bool hydro = cfg_.spatial.well_balanced;
    refresh_ghosts(s, cfg_.bc, eq, hydro);
    StepReport rep;
    rep.dt = dt;
    rep.max_speed = max_speed(s);
    rep.cfl = dt * max_signal(s);
    cache_.clear();
    stages_.clear();
    for (std::size_t k = 0; k < tab.stages; ++k) {
      State stage;
      explicit_stage_operators(s, eq, cache_, tab, k, stage);
      refresh_ghosts(stage, cfg_.bc, eq, hydro);
      const double akk = tab.diagonal(k);
      if (akk != 0.0) {
        const EllipticOperator op =
            assemble_elliptic_deviation(eq, stage.drho, stage.q, akk, dt, cfg_.eps, cfg_.bc);
        EllipticResult res;
        try {
          res = solve(op, &lu_);
        } catch (const NumericalError& e) {
          throw NumericalError("stage " + std::to_string(k + 1) + ": " + e.what());
        }
        rep.elliptic_backward_error.push_back(res.backward_error);
        rep.elliptic_relative_residual.push_back(res.relative_residual);
        for_each_interior(g, [&](int i, int j) {
          set_density_deviation(stage, eq, g.index(i, j), res.deviation(i, j));
        });
        refresh_ghosts(stage, cfg_.bc, eq, hydro);
        Field corr(g);
        for (int d = 0; d < g.dim; ++d) {
          implicit_momentum(stage, eq, d, dt, cfg_.eps, corr);
          for_each_interior(g, [&](int i, int j) { stage.q[d](i, j) -= akk * corr(i, j); });
        }
        refresh_ghosts(stage, cfg_.bc, eq, hydro);
      }
      check_state(stage, "stage " + std::to_string(k + 1));
      if (k + 1 < tab.stages || keep_final_)
        cache_.push_back(stage_tendency(stage, eq, dt, cfg_.eps, cfg_.spatial));
      stages_.push_back(std::move(stage));
    }
    const double t = s.t;
    s = stages_.back();
    s.t = t + dt;
    return rep;
  }

 private:
  const EquilibriumProfile* eq_;
  StepperConfig cfg_;
  bool keep_final_ = false;
  std::vector<StageTendency> cache_;
  std::vector<State> stages_;
  EllipticCache lu_;
};

struct Diagnostics {
  double l2_rho_err = 0.0;   // ||rho - rho_eq||
  double l2_u_err = 0.0;     // ||u||
  double div_residual = 0.0; // ||div(rho_eq u)||
  double ke = 0.0;           // sum 1/2 |q|^2 / rho dV
  double max_mach = 0.0;     // max |u| / sqrt(gamma rho^{gamma-1})
  double balance_residual = 0.0;  // ||grad rho - rho/rho_eq grad rho_eq||
  double multiplier = 0.0;        // least-squares K in rho ~ K rho_eq
};

/// Scalar diagnostics; ghosts of `s` must be refreshed.
inline Diagnostics diagnostics(const State& s, const EquilibriumProfile& eq) {
  const Grid& g = s.grid();
  const double dv = g.cell_volume();
  const double gamma = eq.gamma();
  Diagnostics d;
  double e_rho = 0.0, e_u = 0.0, e_div = 0.0;
  const auto req = eq.rho_eq_storage();
  for_each_interior(g, [&](int i, int j) {
    const std::size_t k = g.index(i, j);
    const double rho = s.rho.at_offset(k);
    double u2 = 0.0, q2 = 0.0, div = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double q = s.q[a].at_offset(k);
      u2 += (q / rho) * (q / rho);
      q2 += q * q;
      const auto st = g.stride(a);
      const double up = req[k + st] * s.q[a].at_offset(k + st) / s.rho.at_offset(k + st);
      const double dn = req[k - st] * s.q[a].at_offset(k - st) / s.rho.at_offset(k - st);
      div += (up - dn) / (2.0 * g.dx(a));
    }
    const double de = rho - req[k];
    e_rho += de * de * dv;
    e_u += u2 * dv;
    e_div += div * div * dv;
    d.ke += 0.5 * q2 / rho * dv;
    d.max_mach = std::max(d.max_mach, std::sqrt(u2) / std::sqrt(gamma * std::pow(rho, gamma - 1.0)));
  });
  d.l2_rho_err = std::sqrt(e_rho);
  d.l2_u_err = std::sqrt(e_u);
  d.div_residual = std::sqrt(e_div);
  double e_bal = 0.0;
  for (const Field& r : linear_balance_residual(s.rho, eq))
    for_each_interior(g, [&](int i, int j) { e_bal += r(i, j) * r(i, j) * dv; });
  d.balance_residual = std::sqrt(e_bal);
  d.multiplier = balance_multiplier(s.rho, eq);
  return d;
}

/// Vorticity d u2/dx1 - d u1/dx2 by central differences (2D; zero in 1D).
inline Field vorticity(const State& s) {
  const Grid& g = s.grid();
  Field w(g);
  if (g.dim != 2) return w;
  for_each_interior(g, [&](int i, int j) {
    const double v_e = s.q[1](i + 1, j) / s.rho(i + 1, j), v_w = s.q[1](i - 1, j) / s.rho(i - 1, j);
    const double u_n = s.q[0](i, j + 1) / s.rho(i, j + 1), u_s = s.q[0](i, j - 1) / s.rho(i, j - 1);
    w(i, j) = (v_e - v_w) / (2.0 * g.dx(0)) - (u_n - u_s) / (2.0 * g.dx(1));
  });
  return w;
}

using Shape = std::function<double(double, double)>;

/// rho = rho_eq + zeta psi, q = 0.
inline State perturbed_equilibrium(const EquilibriumProfile& eq, double zeta, const Shape& psi,
                                   const BoundaryCondition& bc) {
  const Grid& g = eq.grid();
  State s(g);
  for_each_interior(g, [&](int i, int j) {
    const double x1 = g.center(0, i), x2 = g.dim == 2 ? g.center(1, j) : 0.0;
    set_density_deviation(s, eq, g.index(i, j), zeta * psi(x1, x2));
  });
  refresh_ghosts(s, bc, eq);
  return s;
}

/// Well-prepared data: rho = rho_eq + eps^2 psi and a velocity with
/// div(rho_eq u) = 0 under central differences. In 2D rho_eq u comes from the
/// stream function amplitude (sin(pi x1) sin(pi x2))^2; in 1D u = 0.
inline State well_prepared_state(const EquilibriumProfile& eq, double eps, const Shape& psi,
                                 double velocity_amplitude, const BoundaryCondition& bc) {
  State s = perturbed_equilibrium(eq, eps * eps, psi, bc);
  const Grid& g = eq.grid();
  if (g.dim == 2 && velocity_amplitude != 0.0) {
    auto stream = [&](int i, int j) {
      const double a = std::sin(std::numbers::pi * g.center(0, i));
      const double b = std::sin(std::numbers::pi * g.center(1, j));
      return velocity_amplitude * a * a * b * b;
    };
    for_each_interior(g, [&](int i, int j) {
      const double m1 = (stream(i, j + 1) - stream(i, j - 1)) / (2.0 * g.dx(1));
      const double m2 = -(stream(i + 1, j) - stream(i - 1, j)) / (2.0 * g.dx(0));
      const double ratio = s.rho(i, j) / eq.rho_eq_cell(i, j);
      s.q[0](i, j) = ratio * m1;
      s.q[1](i, j) = ratio * m2;
    });
    refresh_ghosts(s, bc, eq);
  }
  return s;
}

/// Ill-prepared data: an O(1) density offset from rho_eq and a velocity
/// u_d = amplitude sin(2 pi x_d) with non-zero div(rho_eq u).
inline State ill_prepared_state(const EquilibriumProfile& eq, double offset, const Shape& psi,
                                double velocity_amplitude, const BoundaryCondition& bc) {
  State s = perturbed_equilibrium(eq, offset, psi, bc);
  const Grid& g = eq.grid();
  for_each_interior(g, [&](int i, int j) {
    for (int d = 0; d < g.dim; ++d) {
      const double x = g.center(d, d == 0 ? i : j);
      s.q[d](i, j) = s.rho(i, j) * velocity_amplitude * std::sin(2.0 * std::numbers::pi * x);
    }
  });
  refresh_ghosts(s, bc, eq);
  return s;
}

}  // namespace anelastic
