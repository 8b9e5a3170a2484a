/// @file cases.hpp
/// @brief Built-in scenarios (hydrostatic perturbations, AOC, Riemann, vortex)
/// and the first-order explicit reference solver.
#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "anelastic/stepper.hpp"

namespace anelastic {

enum class InitialData { perturbation, riemann, vortex };

inline std::string to_string(InitialData d) {
  switch (d) {
    case InitialData::perturbation: return "perturbation";
    case InitialData::riemann: return "riemann";
    case InitialData::vortex: return "vortex";
  }
  return "?";
}

/// Named perturbation shapes psi(x1, x2).
inline Shape shape_from_name(const std::string& name) {
  if (name == "zero") return [](double, double) { return 0.0; };
  if (name == "gaussian-1d")
    return [](double x, double) { return std::exp(-100.0 * (x - 0.5) * (x - 0.5)); };
  if (name == "gaussian-2d")
    return [](double x, double y) {
      return std::exp(-100.0 * ((x - 0.3) * (x - 0.3) + (y - 0.3) * (y - 0.3)));
    };
  throw ConfigError("unknown perturbation shape '" + name +
                    "' (expected zero, gaussian-1d, gaussian-2d)");
}

struct Scenario {
  std::string name;
  int dim = 1;
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{1.0, 1.0};
  std::string potential = "linear";
  double gamma = 1.4;
  double c0 = 1.0;
  double eps = 1.0;
  /// zeta = eps^zeta_power unless zeta_value is set.
  std::optional<double> zeta_value;
  int zeta_power = 2;
  std::string shape = "gaussian-1d";
  BoundaryKind boundary = BoundaryKind::no_flux;
  double final_time = 1.0;
  std::vector<int> meshes{100};  // cells per axis; the first is used by single runs
  DtPolicy dt = DtPolicy::fixed_ratio(0.5);
  std::string tableau = "DP2-A(2,4,2)";
  double beta = 0.7;
  bool well_balanced = true;
  Limiter limiter = Limiter::minmod;
  InitialData initial = InitialData::perturbation;
  double velocity_amplitude = 0.0;  // vortex: a-bar
  std::vector<double> snapshot_times;
  int snapshot_every = 0;

  double zeta() const { return zeta_value ? *zeta_value : std::pow(eps, zeta_power); }
  int cells() const {
    if (meshes.empty()) throw ConfigError("scenario '" + name + "' has no mesh");
    return meshes.front();
  }
  BoundaryCondition bc() const { return BoundaryCondition::uniform(boundary); }

  void validate() const {
    if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2");
    if (!(gamma > 1.0)) throw ConfigError("gamma must exceed 1");
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    if (!(final_time >= 0.0)) throw ConfigError("final time must be non-negative");
    for (int n : meshes)
      if (n < 3) throw ConfigError("meshes need at least 3 cells per axis");
    for (int a = 0; a < dim; ++a)
      if (!(upper[a] > lower[a])) throw ConfigError("domain upper bound must exceed lower bound");
    if (initial == InitialData::riemann && dim != 1) throw ConfigError("riemann data is 1D");
    if (initial == InitialData::vortex && dim != 2) throw ConfigError("vortex data is 2D");
    bc().validate(dim);
    shape_from_name(shape);
    Potential::from_name(potential);
    builtin_tableau(tableau, beta);
  }
};

inline std::vector<std::string> builtin_scenario_names() {
  return {"wb-1d", "perturb-1d", "aoc-1d", "perturb-2d", "riemann-1d", "vortex-2d"};
}

inline Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "wb-1d") {
    s.zeta_value = 0.0;
    s.shape = "zero";
    s.final_time = 10.0;
  } else if (name == "perturb-1d") {
    s.eps = 1e-2;
    s.zeta_power = 2;
    s.final_time = 0.25;
  } else if (name == "aoc-1d") {
    s.eps = 1e-4;
    s.zeta_power = 1;
    s.final_time = 3.0;
    s.meshes = {20, 40, 80, 160, 320};
    s.dt = DtPolicy::fixed_ratio(0.1);
    // Minmod clipping at the perturbation's extremum is amplified by 1/eps^2.
    s.limiter = Limiter::none;
  } else if (name == "perturb-2d") {
    s.dim = 2;
    s.potential = "sum-2d";
    s.zeta_value = 1e-3;
    s.shape = "gaussian-2d";
    s.final_time = 0.05;
    s.meshes = {50};
    s.dt = DtPolicy::fixed_ratio(0.1);
  } else if (name == "riemann-1d") {
    s.potential = "zero";
    s.gamma = 2.0;
    s.eps = 0.3;
    s.shape = "zero";
    s.boundary = BoundaryKind::extrapolation;
    s.final_time = 0.01;
    s.meshes = {1000};
    s.dt = DtPolicy::cfl_number(0.9);
    s.beta = 0.5;
    s.initial = InitialData::riemann;
  } else if (name == "vortex-2d") {
    s.dim = 2;
    s.potential = "radial";
    s.gamma = 2.0;
    s.eps = 1e-1;
    s.shape = "zero";
    s.final_time = 1.0;
    s.meshes = {200};
    s.dt = DtPolicy::cfl_number(0.22);
    s.initial = InitialData::vortex;
    s.velocity_amplitude = 0.1;
  } else {
    std::string list;
    for (const auto& n : builtin_scenario_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown scenario '" + name + "' (available: " + list + ")");
  }
  return s;
}

/// Stationary vortex: u_theta = a1 r (r <= r1), a2 + a3 r (r1 < r <= r2), 0 beyond.
struct VortexSpec {
  double r1 = 0.2;
  double r2 = 0.4;
  double abar = 0.1;
  double cx = 0.5;
  double cy = 0.5;

  double a1() const { return abar / r1; }
  double a2() const { return -abar * r2 / (r1 - r2); }
  double a3() const { return abar / (r1 - r2); }

  double u_theta(double r) const {
    if (r <= r1) return a1() * r;
    if (r <= r2) return a2() + a3() * r;
    return 0.0;
  }

  /// I(r) = int_0^r u_theta(s)^2 / s ds.
  double integral(double r) const {
    const double A1 = a1(), A2 = a2(), A3 = a3();
    auto inner = [&](double x) { return 0.5 * A1 * A1 * x * x; };
    if (r <= r1) return inner(r);
    auto outer = [&](double x) {
      return inner(r1) + A2 * A2 * std::log(x / r1) + 2.0 * A2 * A3 * (x - r1) +
             0.5 * A3 * A3 * (x * x - r1 * r1);
    };
    if (r <= r2) return outer(r);
    return outer(r2);
  }
};

/// rho = 1 + eps^2/2 I(r) - r^2/2.
inline double vortex_density(double r, double eps, const VortexSpec& v = {}) {
  return 1.0 + 0.5 * eps * eps * v.integral(r) - 0.5 * r * r;
}

/// (u, v) = u_theta(r) ((y - cy)/r, -(x - cx)/r), zero at the centre.
inline std::array<double, 2> vortex_velocity(double x, double y, const VortexSpec& v = {}) {
  const double dx = x - v.cx, dy = y - v.cy;
  const double r = std::hypot(dx, dy);
  if (r == 0.0) return {0.0, 0.0};
  const double ut = v.u_theta(r);
  return {ut * dy / r, -ut * dx / r};
}

inline Grid scenario_grid(const Scenario& s, int cells) {
  if (s.dim == 1) return Grid::line(s.lower[0], s.upper[0], cells);
  return Grid::rectangle(s.lower, s.upper, {cells, cells});
}

inline EquilibriumProfile scenario_profile(const Scenario& s, const Grid& g) {
  return EquilibriumProfile(g, Potential::from_name(s.potential), s.gamma, s.c0, s.bc());
}

inline StepperConfig scenario_stepper_config(const Scenario& s) {
  StepperConfig c;
  c.eps = s.eps;
  c.tableau = builtin_tableau(s.tableau, s.beta);
  c.bc = s.bc();
  c.spatial.well_balanced = s.well_balanced;
  c.spatial.limiter = s.limiter;
  c.dt = s.dt;
  return c;
}

/// Initial state with refreshed ghosts.
inline State initial_state(const Scenario& s, const EquilibriumProfile& eq) {
  const Grid& g = eq.grid();
  const BoundaryCondition bc = s.bc();
  switch (s.initial) {
    case InitialData::perturbation: {
      State st = perturbed_equilibrium(eq, s.zeta(), shape_from_name(s.shape), bc);
      refresh_ghosts(st, bc, eq, s.well_balanced);
      return st;
    }
    case InitialData::riemann: {
      State st(g);
      const double jump = s.eps * s.eps;
      const double a = s.lower[0] + 0.25 * (s.upper[0] - s.lower[0]);
      const double b = s.lower[0] + 0.75 * (s.upper[0] - s.lower[0]);
      for_each_interior(g, [&](int i, int j) {
        const double x = g.center(0, i);
        const double rho = (x > a && x <= b) ? 1.0 + jump : 1.0;
        set_density_deviation(st, eq, g.index(i, j), rho - eq.rho_eq_cell(i, j));
        st.q[0](i, j) = 1.0;
      });
      refresh_ghosts(st, bc, eq, s.well_balanced);
      return st;
    }
    case InitialData::vortex: {
      State st(g);
      VortexSpec v;
      v.abar = s.velocity_amplitude;
      for_each_interior(g, [&](int i, int j) {
        const double x = g.center(0, i), y = g.center(1, j);
        const double r = std::hypot(x - v.cx, y - v.cy);
        // rho_eq = 1 - r^2/2 for gamma = 2, C0 = 1, phi = r^2.
        const double closed = 1.0 - 0.5 * r * r;
        const double dev = 0.5 * s.eps * s.eps * v.integral(r) + (closed - eq.rho_eq_cell(i, j));
        set_density_deviation(st, eq, g.index(i, j), dev);
        const auto u = vortex_velocity(x, y, v);
        st.q[0](i, j) = st.rho(i, j) * u[0];
        st.q[1](i, j) = st.rho(i, j) * u[1];
      });
      refresh_ghosts(st, bc, eq, s.well_balanced);
      return st;
    }
  }
  throw ConfigError("unknown initial data");
}

/// Mach number |u| / sqrt(gamma p / rho) per interior cell (unscaled by eps).
inline Field mach_field(const State& s, double gamma) {
  const Grid& g = s.grid();
  Field m(g);
  for_each_interior(g, [&](int i, int j) {
    const double rho = s.rho(i, j);
    double u2 = 0.0;
    for (int d = 0; d < g.dim; ++d) u2 += std::pow(s.q[d](i, j) / rho, 2);
    m(i, j) = std::sqrt(u2) / std::sqrt(gamma * std::pow(rho, gamma - 1.0));
  });
  return m;
}

/// Largest |rho - rho_eq| / zeta over interior cells.
inline double scaled_perturbation_amplitude(const State& s, const EquilibriumProfile& eq,
                                            double zeta) {
  const auto req = eq.rho_eq_storage();
  double m = 0.0;
  for_each_interior(s.grid(), [&](int i, int j) {
    m = std::max(m, std::abs(density_deviation(s, req, s.grid().index(i, j))));
  });
  return m / zeta;
}

struct ReferenceOptions {
  double cfl = 0.1;
  int max_steps = 10'000'000;
};

/// First-order explicit Rusanov scheme on the full system (acoustic waves
/// included), forward Euler. 1D only. Gravity enters as the central source
/// -rho (phi_{i+1} - phi_{i-1}) / (2 dx eps^2).
inline State reference_explicit_solve(const Scenario& sc, int cells, const ReferenceOptions& opt = {}) {
  if (sc.dim != 1) throw ConfigError("the reference solver is 1D only");
  if (!(opt.cfl > 0.0 && opt.cfl <= 1.0))
    throw ConfigError("reference solver CFL must be in (0, 1]");
  const Grid g = scenario_grid(sc, cells);
  const EquilibriumProfile eq = scenario_profile(sc, g);
  const BoundaryCondition bc = sc.bc();
  Scenario plain = sc;
  plain.well_balanced = false;
  State s = initial_state(plain, eq);
  const double gamma = sc.gamma, inv_eps2 = 1.0 / (sc.eps * sc.eps), dx = g.dx(0);
  const int n = g.n(0);
  const auto phi = eq.phi_storage();
  auto speed = [&](double rho, double q) {
    return std::abs(q / rho) + std::sqrt(gamma * std::pow(rho, gamma - 1.0)) / sc.eps;
  };
  std::vector<double> f_rho(n + 1), f_q(n + 1);
  double t = 0.0;
  int steps = 0;
  while (t < sc.final_time) {
    apply_boundary(s.rho, bc, FieldRole::density, &eq);
    apply_boundary(s.q[0], bc, FieldRole::momentum_x1, &eq);
    double lam = 0.0;
    for (int i = -1; i <= n; ++i) lam = std::max(lam, speed(s.rho(i), s.q[0](i)));
    double dt = opt.cfl * dx / lam;
    if (t + dt > sc.final_time) dt = sc.final_time - t;
    if (dt * lam > dx * (1.0 + 1e-12)) throw NumericalError("reference solver CFL violated");
    for (int f = 0; f <= n; ++f) {
      const double rl = s.rho(f - 1), ql = s.q[0](f - 1), rr = s.rho(f), qr = s.q[0](f);
      const double a = std::max(speed(rl, ql), speed(rr, qr));
      const double fl = ql * ql / rl + std::pow(rl, gamma) * inv_eps2;
      const double fr = qr * qr / rr + std::pow(rr, gamma) * inv_eps2;
      f_rho[f] = 0.5 * (ql + qr) - 0.5 * a * (rr - rl);
      f_q[f] = 0.5 * (fl + fr) - 0.5 * a * (qr - ql);
    }
    const double nu = dt / dx;
    for (int i = 0; i < n; ++i) {
      const std::size_t k = g.index(i);
      const double src = s.rho(i) * 0.5 * (phi[k + 1] - phi[k - 1]) * inv_eps2;
      s.rho(i) -= nu * (f_rho[i + 1] - f_rho[i]);
      s.q[0](i) -= nu * (f_q[i + 1] - f_q[i]) + nu * src;
    }
    t += dt;
    if (++steps > opt.max_steps) throw NumericalError("reference solver exceeded its step budget");
    check_state(s, "reference step " + std::to_string(steps));
  }
  apply_boundary(s.rho, bc, FieldRole::density, &eq);
  apply_boundary(s.q[0], bc, FieldRole::momentum_x1, &eq);
  sync_deviation(s, eq);
  s.t = t;
  return s;
}

}  // namespace anelastic
