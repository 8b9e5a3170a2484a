// Hand-written reference for the semi-discrete operators with phi = 0 and
// C0 = 1 (so rho_eq = 1) on a periodic 1D line with an unlimited linear
// reconstruction of (p - 1, u). Plain vectors, no library types.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

struct Tendency {
  std::vector<double> mass, mom_explicit, mom_implicit;
};

inline Tendency flat_tendency(const std::vector<double>& rho, const std::vector<double>& q,
                              double gamma, double nu, double eps) {
  const int n = static_cast<int>(rho.size());
  std::vector<double> om(n), u(n);
  for (int i = 0; i < n; ++i) {
    om[i] = std::pow(rho[i], gamma) - 1.0;
    u[i] = q[i] / rho[i];
  }
  auto slope = [&](const std::vector<double>& v, int i) {
    return 0.5 * (v[wrap(i + 1, n)] - v[wrap(i - 1, n)]);
  };
  // face f sits between cells f-1 and f
  std::vector<double> adv(n + 1), pres(n + 1);
  for (int f = 0; f <= n; ++f) {
    const int l = wrap(f - 1, n), r = wrap(f, n);
    const double pl = 1.0 + om[l] + 0.5 * slope(om, l);
    const double pr = 1.0 + om[r] - 0.5 * slope(om, r);
    const double ul = u[l] + 0.5 * slope(u, l);
    const double ur = u[r] - 0.5 * slope(u, r);
    const double rl = std::pow(pl, 1.0 / gamma), rr = std::pow(pr, 1.0 / gamma);
    const double alpha = 2.0 * std::max(std::abs(ul), std::abs(ur));
    adv[f] = 0.5 * (rl * ul * ul + rr * ur * ur) - 0.5 * alpha * (rr * ur - rl * ul);
    pres[f] = 0.5 * (pl + pr);
  }
  Tendency t;
  t.mass.resize(n);
  t.mom_explicit.resize(n);
  t.mom_implicit.resize(n);
  const double s = nu / (eps * eps);
  for (int i = 0; i < n; ++i) {
    const double L = 0.5 * (rho[wrap(i + 1, n)] - rho[wrap(i - 1, n)]);
    t.mass[i] = nu * 0.5 * (q[wrap(i + 1, n)] - q[wrap(i - 1, n)]);
    t.mom_explicit[i] = nu * (adv[i + 1] - adv[i]) + s * ((pres[i + 1] - pres[i]) - L);
    t.mom_implicit[i] = s * L;
  }
  return t;
}

/// Dense solve with partial pivoting.
inline std::vector<double> gauss(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

}  // namespace oracle
