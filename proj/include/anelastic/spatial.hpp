/// @file spatial.hpp
/// @brief Second-order reconstruction, Rusanov/central numerical fluxes, the
/// gravitational and penalization sources, and the per-stage explicit operators.
///
/// A stage tendency caches, for every interior cell,
///   M   = sum_d nu_d (G1_{i+1/2} - G1_{i-1/2})                 (mass, implicit)
///   E_c = sum_d nu_d delta F_adv + nu_c/eps^2 [delta P + dx S - L]  (momentum, explicit)
///   I_c = nu_c/eps^2 L                                           (momentum, implicit)
/// where L = delta G2 - dx S~ is the linear balance pair. Grouping the pairs
/// this way makes them cancel exactly at hydrostatic rest.
///
/// The stiff bracket is evaluated in deviation variables theta = rho/rho_eq - 1
/// and omega = w1 - 1, so its rounding error scales with the distance from
/// equilibrium instead of with O(1). Otherwise nu/eps^2 amplifies plain
/// rounding into a checkerboard momentum mode that the central mass flux
/// cannot see.
#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "anelastic/equilibrium.hpp"
#include "anelastic/imex.hpp"
#include "anelastic/mesh.hpp"

namespace anelastic {

/// Conserved state (rho, q1, q2). In 1D q[1] stays zero and is never used.
///
/// `drho` carries rho - rho_eq to full relative precision. It is trusted in a
/// cell only while rho_eq + drho == rho there, so a state built or edited
/// through `rho` alone stays valid.
struct State {
  Field rho;
  Field drho;
  std::array<Field, 2> q;
  double t = 0.0;

  State() = default;
  explicit State(const Grid& g) : rho(g), drho(g), q{Field(g), Field(g)} {}
  const Grid& grid() const { return rho.grid(); }
};

namespace detail {

inline double deviation(double rho, double drho, double rho_eq) {
  return rho_eq + drho == rho ? drho : rho - rho_eq;
}

}  // namespace detail

/// Effective rho - rho_eq at storage offset k.
inline double density_deviation(const State& s, std::span<const double> req, std::size_t k) {
  return detail::deviation(s.rho.at_offset(k), s.drho.at_offset(k), req[k]);
}

/// Sets the density from its deviation: drho = dev, rho = rho_eq + dev.
inline void set_density_deviation(State& s, const EquilibriumProfile& eq, std::size_t k, double dev) {
  s.drho.at_offset(k) = dev;
  s.rho.at_offset(k) = eq.rho_eq_storage()[k] + dev;
}

/// Makes `drho` consistent with `rho` in every interior cell.
inline void sync_deviation(State& s, const EquilibriumProfile& eq) {
  const auto req = eq.rho_eq_storage();
  for_each_interior(s.grid(), [&](int i, int j) {
    const std::size_t k = s.grid().index(i, j);
    s.drho.at_offset(k) = density_deviation(s, req, k);
  });
}

/// No-flux density ghosts mirror rho/rho_eq when `hydrostatic` is set (the
/// well-balanced scheme) and mirror rho itself otherwise. Density ghosts are
/// built on the deviation and rho = rho_eq + drho.
inline void refresh_ghosts(State& s, const BoundaryCondition& bc, const EquilibriumProfile& eq,
                           bool hydrostatic = true) {
  const Grid& g = s.grid();
  sync_deviation(s, eq);
  apply_boundary_deviation(s.drho, bc, eq, hydrostatic);
  const auto req = eq.rho_eq_storage();
  const int jlo = g.dim == 2 ? -Grid::ghost : 0, jhi = g.dim == 2 ? g.n(1) + Grid::ghost : 1;
  for (int i = -Grid::ghost; i < g.n(0) + Grid::ghost; ++i)
    for (int j = jlo; j < jhi; ++j) {
      const bool inside = i >= 0 && i < g.n(0) && (g.dim == 1 || (j >= 0 && j < g.n(1)));
      if (inside) continue;
      const std::size_t k = g.index(i, j);
      s.rho.at_offset(k) = req[k] + s.drho.at_offset(k);
    }
  apply_boundary(s.q[0], bc, FieldRole::momentum_x1, &eq);
  if (g.dim == 2) apply_boundary(s.q[1], bc, FieldRole::momentum_x2, &eq);
}

enum class Limiter { minmod, van_leer, none };

inline std::string to_string(Limiter l) {
  switch (l) {
    case Limiter::minmod: return "minmod";
    case Limiter::van_leer: return "van-leer";
    case Limiter::none: return "none";
  }
  return "?";
}

inline Limiter limiter_from_string(const std::string& s) {
  if (s == "minmod") return Limiter::minmod;
  if (s == "van-leer" || s == "vanleer") return Limiter::van_leer;
  if (s == "none" || s == "unlimited") return Limiter::none;
  throw ConfigError("unknown limiter '" + s + "' (expected minmod, van-leer, none)");
}

struct SpatialOptions {
  bool well_balanced = true;
  Limiter limiter = Limiter::minmod;
};

namespace detail {

inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return a > 0.0 ? std::min(a, b) : std::max(a, b);
}

/// (1 + theta)^gamma - 1 without cancellation.
inline double pow_dev(double theta, double gamma) {
  return std::expm1(gamma * std::log1p(theta));
}

inline double limited_slope(double left, double mid, double right, Limiter lim) {
  const double a = mid - left, b = right - mid;
  switch (lim) {
    case Limiter::none: return 0.5 * (right - left);
    case Limiter::van_leer: return a * b > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
    case Limiter::minmod: break;
  }
  return minmod(a, b);
}

/// Cell (a, t) addressed along `axis`, with t the transverse index.
inline double line_value(const Field& f, int axis, int a, int t) {
  return axis == 0 ? f(a, t) : f(t, a);
}

inline std::string cell_name(int axis, int a, int t, int dim) {
  std::ostringstream os;
  if (dim == 1) os << "cell " << a;
  else if (axis == 0) os << "cell (" << a << ", " << t << ")";
  else os << "cell (" << t << ", " << a << ")";
  return os.str();
}

}  // namespace detail

/// Left (minus) and right (plus) traces at every face along one axis.
/// Face f separates cells f-1 and f; slot = f * nt + t.
struct FaceStates {
  int axis = 0;
  int nf = 0;
  int nt = 0;
  std::vector<double> w_m, w_p;    // balanced variable p e^{-H} (rho in the primitive variant)
  std::vector<double> om_m, om_p;  // w - 1 (well-balanced only)
  std::vector<double> rho_m, rho_p;
  std::vector<double> p_m, p_p;
  std::vector<double> un_m, un_p;  // normal velocity
  std::vector<double> ut_m, ut_p;  // transverse velocity (2D)

  std::size_t slot(int f, int t) const { return static_cast<std::size_t>(f) * nt + t; }
  void resize(std::size_t n) {
    for (auto* v : {&w_m, &w_p, &om_m, &om_p, &rho_m, &rho_p, &p_m, &p_p, &un_m, &un_p, &ut_m, &ut_p})
      v->assign(n, 0.0);
  }
};

struct InterfaceStates {
  std::array<FaceStates, 2> axes;
};

/// Limited piecewise-linear traces along one axis.
///
/// Well-balanced: reconstruct (w1, u) = (p e^{-H}, q/rho), then
/// p = e^{H_face} w1, rho = p^{1/gamma}. Primitive: reconstruct (rho, u), p = rho^gamma.
inline FaceStates reconstruct_axis(const State& s, const EquilibriumProfile& eq, int axis,
                                   const SpatialOptions& opt = {}) {
  const Grid& g = s.grid();
  const int n = g.n(axis);
  const int nt = g.dim == 1 ? 1 : g.n(1 - axis);
  const double gamma = eq.gamma();
  FaceStates fs;
  fs.axis = axis;
  fs.nf = n + 1;
  fs.nt = nt;
  fs.resize(static_cast<std::size_t>(fs.nf) * nt);

  const int len = n + 2 * Grid::ghost;
  std::vector<double> w(len), un(len), ut(len);  // w holds omega = w1 - 1 when well-balanced
  for (int t = 0; t < nt; ++t) {
    for (int a = -Grid::ghost; a < n + Grid::ghost; ++a) {
      const int k = a + Grid::ghost;
      const double rho = detail::line_value(s.rho, axis, a, t);
      if (!(rho > 0.0))
        throw NumericalError("non-positive density at " + detail::cell_name(axis, a, t, g.dim));
      if (opt.well_balanced) {
        const std::size_t off = axis == 0 ? g.index(a, t) : g.index(t, a);
        const auto req = eq.rho_eq_storage();
        w[k] = detail::pow_dev(density_deviation(s, req, off) / req[off], gamma);
      } else {
        w[k] = rho;
      }
      un[k] = detail::line_value(s.q[axis], axis, a, t) / rho;
      ut[k] = g.dim == 2 ? detail::line_value(s.q[1 - axis], axis, a, t) / rho : 0.0;
    }
    for (int a = -1; a <= n; ++a) {
      const int k = a + Grid::ghost;
      const double sw = detail::limited_slope(w[k - 1], w[k], w[k + 1], opt.limiter);
      const double sn = detail::limited_slope(un[k - 1], un[k], un[k + 1], opt.limiter);
      const double st = detail::limited_slope(ut[k - 1], ut[k], ut[k + 1], opt.limiter);
      // Cell a feeds the minus side of face a+1 and the plus side of face a.
      if (a + 1 <= n) {
        const std::size_t m = fs.slot(a + 1, t);
        fs.w_m[m] = w[k] + 0.5 * sw;
        fs.un_m[m] = un[k] + 0.5 * sn;
        fs.ut_m[m] = ut[k] + 0.5 * st;
      }
      if (a >= 0) {
        const std::size_t p = fs.slot(a, t);
        fs.w_p[p] = w[k] - 0.5 * sw;
        fs.un_p[p] = un[k] - 0.5 * sn;
        fs.ut_p[p] = ut[k] - 0.5 * st;
      }
    }
    for (int f = 0; f <= n; ++f) {
      const std::size_t m = fs.slot(f, t);
      auto finish = [&](double& wv, double& om, double& rho, double& p, int cell) {
        if (opt.well_balanced) {
          om = wv;
          wv = 1.0 + om;
          p = eq.exp_h_face(axis, f, t) * wv;
          if (!(p > 0.0))
            throw NumericalError("non-positive reconstructed pressure next to " +
                                 detail::cell_name(axis, cell, t, g.dim));
          rho = std::pow(p, 1.0 / gamma);
        } else {
          if (!(wv > 0.0))
            throw NumericalError("non-positive reconstructed density next to " +
                                 detail::cell_name(axis, cell, t, g.dim));
          rho = wv;
          p = std::pow(rho, gamma);
        }
      };
      finish(fs.w_m[m], fs.om_m[m], fs.rho_m[m], fs.p_m[m], f - 1);
      finish(fs.w_p[m], fs.om_p[m], fs.rho_p[m], fs.p_p[m], f);
    }
  }
  return fs;
}

inline InterfaceStates reconstruct(const State& s, const EquilibriumProfile& eq,
                                   const SpatialOptions& opt = {}) {
  InterfaceStates st;
  for (int axis = 0; axis < s.grid().dim; ++axis) st.axes[axis] = reconstruct_axis(s, eq, axis, opt);
  return st;
}

/// alpha = 2 max(|u-|, |u+|); acoustic waves are handled implicitly.
inline double wave_speed(double u_minus, double u_plus) {
  return 2.0 * std::max(std::abs(u_minus), std::abs(u_plus));
}

/// Advective part of the normal and transverse momentum fluxes at one face,
/// including the Rusanov diffusion. The pressure part is kept separate.
struct AdvectiveFlux {
  double normal = 0.0;
  double transverse = 0.0;
};

inline AdvectiveFlux advective_flux(const FaceStates& fs, std::size_t m) {
  const double qn_m = fs.rho_m[m] * fs.un_m[m], qn_p = fs.rho_p[m] * fs.un_p[m];
  const double qt_m = fs.rho_m[m] * fs.ut_m[m], qt_p = fs.rho_p[m] * fs.ut_p[m];
  const double alpha = wave_speed(fs.un_m[m], fs.un_p[m]);
  AdvectiveFlux f;
  f.normal = 0.5 * (qn_p * fs.un_p[m] + qn_m * fs.un_m[m]) - 0.5 * alpha * (qn_p - qn_m);
  f.transverse = 0.5 * (qt_p * fs.un_p[m] + qt_m * fs.un_m[m]) - 0.5 * alpha * (qt_p - qt_m);
  return f;
}

/// F2 = 1/2 (F2(U+) + F2(U-)) - alpha/2 (q+ - q-), F2(U) = q^2/rho + p/eps^2.
inline std::vector<double> rusanov_momentum_flux(const FaceStates& fs, double eps) {
  std::vector<double> out(fs.w_m.size());
  const double inv = 1.0 / (eps * eps);
  for (std::size_t m = 0; m < out.size(); ++m)
    out[m] = advective_flux(fs, m).normal + 0.5 * (fs.p_p[m] + fs.p_m[m]) * inv;
  return out;
}

/// G1 = 1/2 (q_i + q_{i+1}), G2 = 1/2 (rho_i + rho_{i+1}) from raw cell values.
struct CentralFluxes {
  std::vector<double> g1, g2;  // slot = f * nt + t
};

inline CentralFluxes central_fluxes(const Field& rho, const Field& q_axis, int axis) {
  const Grid& g = rho.grid();
  const int n = g.n(axis), nt = g.dim == 1 ? 1 : g.n(1 - axis);
  CentralFluxes c;
  c.g1.assign(static_cast<std::size_t>(n + 1) * nt, 0.0);
  c.g2.assign(c.g1.size(), 0.0);
  for (int f = 0; f <= n; ++f)
    for (int t = 0; t < nt; ++t) {
      const std::size_t m = static_cast<std::size_t>(f) * nt + t;
      c.g1[m] = 0.5 * (detail::line_value(q_axis, axis, f - 1, t) +
                       detail::line_value(q_axis, axis, f, t));
      c.g2[m] = 0.5 * (detail::line_value(rho, axis, f - 1, t) + detail::line_value(rho, axis, f, t));
    }
  return c;
}

/// Gravitational source along `axis`.
/// Well-balanced: S_i = -p_i e^{-H_i} (e^{H_{i+1/2}} - e^{H_{i-1/2}}) / dx.
/// Primitive: S_i = rho_i (phi_{i+1} - phi_{i-1}) / (2 dx).
inline Field grav_source(const Field& rho, const EquilibriumProfile& eq, int axis,
                         bool well_balanced = true) {
  const Grid& g = rho.grid();
  Field out(g);
  const double dx = g.dx(axis);
  for_each_interior(g, [&](int i, int j) {
    const int a = axis == 0 ? i : j, t = axis == 0 ? j : i;
    if (well_balanced) {
      const double w = std::pow(rho(i, j), eq.gamma()) / eq.exp_h_cell(i, j);
      out(i, j) = -w * (eq.exp_h_face(axis, a + 1, t) - eq.exp_h_face(axis, a, t)) / dx;
    } else {
      const double up = axis == 0 ? eq.phi_cell(i + 1, j) : eq.phi_cell(i, j + 1);
      const double dn = axis == 0 ? eq.phi_cell(i - 1, j) : eq.phi_cell(i, j - 1);
      out(i, j) = rho(i, j) * 0.5 * (up - dn) / dx;
    }
  });
  return out;
}

/// S~_i = (rho_i / rho_eq,i) (rho_eq,i+1 - rho_eq,i-1) / (2 dx).
inline Field penalization_source(const Field& rho, const EquilibriumProfile& eq, int axis) {
  const Grid& g = rho.grid();
  Field out(g);
  const auto s = g.stride(axis);
  const auto r = eq.rho_eq_storage();
  for_each_interior(g, [&](int i, int j) {
    const std::size_t k = g.index(i, j);
    out(i, j) = rho.at_offset(k) / r[k] * 0.5 * (r[k + s] - r[k - s]) / g.dx(axis);
  });
  return out;
}

/// Cached explicit and implicit tendencies of one stage (interior cells).
struct StageTendency {
  Field mass;
  std::array<Field, 2> mom_explicit;
  std::array<Field, 2> mom_implicit;
};

/// Linear balance pair L_i = 1/2 (rho_{i+1} - rho_{i-1}) - (rho_i/rho_eq,i) 1/2 (rho_eq,i+1 - rho_eq,i-1),
/// evaluated as 1/2 [rho_eq,i+1 (theta_{i+1} - theta_i) - rho_eq,i-1 (theta_{i-1} - theta_i)]
/// with theta = (rho - rho_eq)/rho_eq.
inline double balance_pair(const State& st, std::span<const double> req, std::size_t k,
                           std::ptrdiff_t s) {
  const double th = density_deviation(st, req, k) / req[k];
  const double up = density_deviation(st, req, k + s) / req[k + s];
  const double dn = density_deviation(st, req, k - s) / req[k - s];
  return 0.5 * (req[k + s] * (up - th) - req[k - s] * (dn - th));
}

/// Implicit momentum tendency nu/eps^2 L along `axis`, written into `out`.
inline void implicit_momentum(const State& st, const EquilibriumProfile& eq, int axis, double dt,
                              double eps, Field& out) {
  const Grid& g = st.grid();
  const double c = dt / g.dx(axis) / (eps * eps);
  const auto s = g.stride(axis);
  const auto req = eq.rho_eq_storage();
  for_each_interior(g, [&](int i, int j) {
    const std::size_t k = g.index(i, j);
    out.at_offset(k) = c * balance_pair(st, req, k, s);
  });
}

/// Full stage tendency of a state with refreshed ghosts.
inline StageTendency stage_tendency(const State& s, const EquilibriumProfile& eq, double dt,
                                    double eps, const SpatialOptions& opt = {}) {
  const Grid& g = s.grid();
  StageTendency out{Field(g), {Field(g), Field(g)}, {Field(g), Field(g)}};
  const double inv_eps2 = 1.0 / (eps * eps);
  const auto req = eq.rho_eq_storage();
  const auto phi = eq.phi_storage();
  for (int axis = 0; axis < g.dim; ++axis) {
    const FaceStates fs = reconstruct_axis(s, eq, axis, opt);
    const int n = g.n(axis), nt = fs.nt;
    const double nu = dt / g.dx(axis);
    const double nu_s = nu * inv_eps2;
    const auto st = g.stride(axis);
    std::vector<AdvectiveFlux> adv(fs.w_m.size());
    std::vector<double> pres(fs.w_m.size()), dev(fs.w_m.size());
    for (std::size_t m = 0; m < adv.size(); ++m) {
      adv[m] = advective_flux(fs, m);
      pres[m] = 0.5 * (fs.p_p[m] + fs.p_m[m]);
      dev[m] = 0.5 * (fs.om_p[m] + fs.om_m[m]);
    }
    Field& e_n = out.mom_explicit[axis];
    Field& e_t = out.mom_explicit[1 - axis];
    for (int a = 0; a < n; ++a) {
      for (int t = 0; t < nt; ++t) {
        const int i = axis == 0 ? a : t, j = axis == 0 ? t : a;
        const std::size_t k = g.index(i, j);
        const std::size_t lo = fs.slot(a, t), hi = fs.slot(a + 1, t);
        const double rho_i = s.rho.at_offset(k);
        const double L = balance_pair(s, req, k, st);
        // delta P + dx S
        double gp;
        if (opt.well_balanced) {
          const double om = detail::pow_dev(density_deviation(s, req, k) / req[k], eq.gamma());
          gp = eq.exp_h_face(axis, a + 1, t) * (dev[hi] - om) -
               eq.exp_h_face(axis, a, t) * (dev[lo] - om);
        } else {
          gp = (pres[hi] - pres[lo]) + rho_i * (0.5 * (phi[k + st] - phi[k - st]));
        }
        out.mass.at_offset(k) +=
            nu * (0.5 * (s.q[axis].at_offset(k + st) - s.q[axis].at_offset(k - st)));
        e_n.at_offset(k) += nu * (adv[hi].normal - adv[lo].normal) + nu_s * (gp - L);
        if (g.dim == 2) e_t.at_offset(k) += nu * (adv[hi].transverse - adv[lo].transverse);
        out.mom_implicit[axis].at_offset(k) = nu_s * L;
      }
    }
  }
  return out;
}

/// Explicit predictor of stage k (0-based) from the cached tendencies of
/// stages 0..k-1:
///   rho^ - rho_eq = (rho^n - rho_eq) - sum a_kl M_l,  q^ = q^n - sum a~_kl E_l - sum a_kl I_l.
/// Interior values only; ghosts are left for the caller to refresh.
inline void explicit_stage_operators(const State& base, const EquilibriumProfile& eq,
                                     const std::vector<StageTendency>& cache,
                                     const ImexTableau& tab, std::size_t k, State& hat) {
  if (cache.size() < k)
    throw std::logic_error("stage cache incomplete: stage " + std::to_string(k) + " needs " +
                           std::to_string(k) + " cached stages, have " +
                           std::to_string(cache.size()));
  const Grid& g = base.grid();
  const auto req = eq.rho_eq_storage();
  hat = base;
  for_each_interior(g, [&](int i, int j) {
    const std::size_t c = g.index(i, j);
    double r = density_deviation(base, req, c);
    for (std::size_t l = 0; l < k; ++l) {
      const double a = tab.a_implicit(k, l);
      if (a != 0.0) r -= a * cache[l].mass.at_offset(c);
    }
    hat.drho.at_offset(c) = r;
    hat.rho.at_offset(c) = req[c] + r;
    for (int comp = 0; comp < g.dim; ++comp) {
      double q = base.q[comp].at_offset(c);
      for (std::size_t l = 0; l < k; ++l) {
        const double ae = tab.a_explicit(k, l);
        const double ai = tab.a_implicit(k, l);
        if (ae != 0.0) q -= ae * cache[l].mom_explicit[comp].at_offset(c);
        if (ai != 0.0) q -= ai * cache[l].mom_implicit[comp].at_offset(c);
      }
      hat.q[comp].at_offset(c) = q;
    }
  });
}

}  // namespace anelastic
