/// @file mesh.hpp
/// @brief Structured Cartesian grids, ghosted cell fields, boundary refresh and
/// the face-to-cell difference/average operators.
///
/// Index conventions used everywhere in the library:
///  - interior cells along an axis are 0..n-1, ghosts are -2,-1 and n,n+1;
///  - a face array along an axis has n+1 entries and entry f is the interface
///    between cells f-1 and f (so interface i+1/2 lives at face index i+1);
///  - 2D storage is row-major with axis 0 (x1) the slow index.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace anelastic {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Grid {
  static constexpr int ghost = 2;

  int dim = 1;
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{1.0, 1.0};
  std::array<int, 2> cells{1, 1};
  std::array<double, 2> spacing{1.0, 1.0};

  Grid() = default;

  static Grid line(double lo, double hi, int n) {
    return Grid(1, {lo, 0.0}, {hi, 1.0}, {n, 1});
  }
  static Grid rectangle(std::array<double, 2> lo, std::array<double, 2> hi,
                        std::array<int, 2> n) {
    return Grid(2, lo, hi, n);
  }

  Grid(int dimension, std::array<double, 2> lo, std::array<double, 2> hi,
       std::array<int, 2> n)
      : dim(dimension), lower(lo), upper(hi), cells(n) {
    if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
    if (dim == 1) cells[1] = 1;
    for (int a = 0; a < dim; ++a) {
      if (cells[a] <= 0) throw ConfigError("cell count must be positive");
      if (!(upper[a] > lower[a])) throw ConfigError("grid extent must be non-empty");
      spacing[a] = (upper[a] - lower[a]) / cells[a];
    }
    if (dim == 1) spacing[1] = 1.0;
  }

  int n(int axis) const { return cells[axis]; }
  double dx(int axis) const { return spacing[axis]; }
  double cell_volume() const { return dim == 1 ? spacing[0] : spacing[0] * spacing[1]; }
  double min_spacing() const {
    return dim == 1 ? spacing[0] : std::min(spacing[0], spacing[1]);
  }
  std::size_t interior_count() const {
    return static_cast<std::size_t>(cells[0]) * (dim == 2 ? cells[1] : 1);
  }

  // Padded extents (including ghosts).
  int padded(int axis) const {
    if (axis == 1 && dim == 1) return 1;
    return cells[axis] + 2 * ghost;
  }
  std::size_t storage_size() const {
    return static_cast<std::size_t>(padded(0)) * padded(1);
  }
  /// Storage offset of cell (i, j); j is ignored in 1D.
  std::size_t index(int i, int j = 0) const {
    const int gy = dim == 2 ? ghost : 0;
    const int jj = dim == 2 ? j : 0;
    return static_cast<std::size_t>(i + ghost) * padded(1) + static_cast<std::size_t>(jj + gy);
  }
  /// Storage distance between neighbours along an axis.
  std::ptrdiff_t stride(int axis) const {
    return axis == 0 ? static_cast<std::ptrdiff_t>(padded(1)) : 1;
  }
  /// Row-major interior numbering used by the elliptic unknowns.
  std::size_t interior_index(int i, int j = 0) const {
    return dim == 2 ? static_cast<std::size_t>(i) * cells[1] + j : static_cast<std::size_t>(i);
  }

  double center(int axis, int i) const { return lower[axis] + (i + 0.5) * spacing[axis]; }
  double face(int axis, int f) const { return lower[axis] + f * spacing[axis]; }
};

/// Visits every interior cell in storage order (i outer, j inner).
template <class Fn>
void for_each_interior(const Grid& g, Fn&& fn) {
  const int ny = g.dim == 2 ? g.cells[1] : 1;
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < ny; ++j) fn(i, j);
}

class Field {
 public:
  Field() = default;
  explicit Field(const Grid& g, double value = 0.0) : grid_(g), data_(g.storage_size(), value) {}

  const Grid& grid() const { return grid_; }
  double& operator()(int i, int j = 0) { return data_[grid_.index(i, j)]; }
  double operator()(int i, int j = 0) const { return data_[grid_.index(i, j)]; }
  double& at_offset(std::size_t k) { return data_[k]; }
  double at_offset(std::size_t k) const { return data_[k]; }
  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }
  bool empty() const { return data_.empty(); }

  std::vector<double> interior() const {
    std::vector<double> out;
    out.reserve(grid_.interior_count());
    for_each_interior(grid_, [&](int i, int j) { out.push_back((*this)(i, j)); });
    return out;
  }
  void set_interior(std::span<const double> values) {
    if (values.size() != grid_.interior_count())
      throw std::invalid_argument("interior size mismatch");
    std::size_t k = 0;
    for_each_interior(grid_, [&](int i, int j) { (*this)(i, j) = values[k++]; });
  }

 private:
  Grid grid_;
  std::vector<double> data_;
};

enum class BoundaryKind { periodic, no_flux, extrapolation, dirichlet_equilibrium };

inline std::string to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::periodic: return "periodic";
    case BoundaryKind::no_flux: return "no-flux";
    case BoundaryKind::extrapolation: return "extrapolation";
    case BoundaryKind::dirichlet_equilibrium: return "dirichlet-equilibrium";
  }
  return "?";
}

inline BoundaryKind boundary_kind_from_string(const std::string& s) {
  if (s == "periodic") return BoundaryKind::periodic;
  if (s == "no-flux" || s == "noflux" || s == "reflecting") return BoundaryKind::no_flux;
  if (s == "extrapolation") return BoundaryKind::extrapolation;
  if (s == "dirichlet-equilibrium" || s == "dirichlet") return BoundaryKind::dirichlet_equilibrium;
  throw ConfigError("unknown boundary condition '" + s +
                    "' (expected periodic, no-flux, extrapolation, dirichlet-equilibrium)");
}

/// Boundary kind per axis per side: sides[axis][0] is the lower side.
struct BoundaryCondition {
  std::array<std::array<BoundaryKind, 2>, 2> sides{
      {{BoundaryKind::no_flux, BoundaryKind::no_flux},
       {BoundaryKind::no_flux, BoundaryKind::no_flux}}};

  static BoundaryCondition uniform(BoundaryKind k) {
    BoundaryCondition bc;
    for (auto& axis : bc.sides) axis = {k, k};
    return bc;
  }
  BoundaryKind kind(int axis, int side) const { return sides[axis][side]; }
  bool periodic(int axis) const { return sides[axis][0] == BoundaryKind::periodic; }
  bool uses(BoundaryKind k, int dim) const {
    for (int a = 0; a < dim; ++a)
      if (sides[a][0] == k || sides[a][1] == k) return true;
    return false;
  }
  void validate(int dim) const {
    for (int a = 0; a < dim; ++a) {
      const bool lo = sides[a][0] == BoundaryKind::periodic;
      const bool hi = sides[a][1] == BoundaryKind::periodic;
      if (lo != hi)
        throw ConfigError("periodic boundary must be set on both sides of axis " +
                          std::to_string(a));
    }
  }
};

/// What a field represents, which decides its ghost recipe.
enum class FieldRole { density, momentum_x1, momentum_x2, scalar };

/// Equilibrium data needed by the ghost recipes; implemented by
/// EquilibriumProfile. Kept abstract here so the mesh has no upward dependency.
struct GhostEquilibrium {
  virtual ~GhostEquilibrium() = default;
  /// Equilibrium density at cell (i, j), ghosts included.
  virtual double rho_eq_cell(int i, int j) const = 0;
};

namespace detail {

inline int mirror(int g, int n) { return g < 0 ? -1 - g : 2 * n - 1 - g; }
inline int wrap(int g, int n) { return ((g % n) + n) % n; }
inline int clamp_edge(int g, int n) { return g < 0 ? 0 : n - 1; }

}  // namespace detail

/// Refreshes the ghost layers of one field.
///
/// No-flux mirrors the ratio rho/rho_eq when equilibrium data is supplied
/// (plain mirror otherwise) and negates the normal momentum. Extrapolation
/// copies the adjacent interior cell. Dirichlet-equilibrium sets rho = rho_eq
/// and momentum = 0 and requires equilibrium data.
inline void apply_boundary(Field& field, const BoundaryCondition& bc, FieldRole role,
                           const GhostEquilibrium* equilibrium = nullptr) {
  const Grid& g = field.grid();
  bc.validate(g.dim);
  if (bc.uses(BoundaryKind::dirichlet_equilibrium, g.dim) && equilibrium == nullptr)
    throw ConfigError("dirichlet-equilibrium boundary requires an equilibrium profile");
  if (role == FieldRole::scalar && bc.uses(BoundaryKind::dirichlet_equilibrium, g.dim))
    throw ConfigError("dirichlet-equilibrium boundary is undefined for scalar fields");

  for (int axis = 0; axis < g.dim; ++axis) {
    const int n = g.n(axis);
    // Along axis 0 sweep interior j; along axis 1 sweep every i so corners fill.
    const int t_lo = axis == 0 ? 0 : -Grid::ghost;
    const int t_hi = axis == 0 ? (g.dim == 2 ? g.n(1) : 1) : g.n(0) + Grid::ghost;
    const bool normal_momentum = (role == FieldRole::momentum_x1 && axis == 0) ||
                                 (role == FieldRole::momentum_x2 && axis == 1);
    for (int t = t_lo; t < t_hi; ++t) {
      auto cell = [&](int a) -> double& { return axis == 0 ? field(a, t) : field(t, a); };
      auto eq = [&](int a) { return axis == 0 ? equilibrium->rho_eq_cell(a, t)
                                              : equilibrium->rho_eq_cell(t, a); };
      for (int side = 0; side < 2; ++side) {
        const BoundaryKind kind = bc.kind(axis, side);
        for (int k = 1; k <= Grid::ghost; ++k) {
          const int gi = side == 0 ? -k : n - 1 + k;
          switch (kind) {
            case BoundaryKind::periodic:
              cell(gi) = cell(detail::wrap(gi, n));
              break;
            case BoundaryKind::extrapolation:
              cell(gi) = cell(detail::clamp_edge(gi, n));
              break;
            case BoundaryKind::no_flux: {
              const int src = detail::mirror(gi, n);
              if (role == FieldRole::density && equilibrium != nullptr)
                cell(gi) = eq(gi) * (cell(src) / eq(src));
              else
                cell(gi) = normal_momentum ? -cell(src) : cell(src);
              break;
            }
            case BoundaryKind::dirichlet_equilibrium:
              cell(gi) = role == FieldRole::density ? eq(gi) : 0.0;
              break;
          }
        }
      }
    }
  }
}

/// Ghosts of the density deviation rho - rho_eq, following the density
/// recipes of apply_boundary: copies of rho become drho_src + rho_eq,src -
/// rho_eq,ghost, the no-flux ratio mirror becomes rho_eq,ghost drho_src/rho_eq,src
/// (plain copy of rho when `ratio_mirror` is false) and dirichlet-equilibrium
/// ghosts are zero.
inline void apply_boundary_deviation(Field& drho, const BoundaryCondition& bc,
                                     const GhostEquilibrium& equilibrium, bool ratio_mirror = true) {
  const Grid& g = drho.grid();
  bc.validate(g.dim);
  for (int axis = 0; axis < g.dim; ++axis) {
    const int n = g.n(axis);
    const int t_lo = axis == 0 ? 0 : -Grid::ghost;
    const int t_hi = axis == 0 ? (g.dim == 2 ? g.n(1) : 1) : g.n(0) + Grid::ghost;
    for (int t = t_lo; t < t_hi; ++t) {
      auto cell = [&](int a) -> double& { return axis == 0 ? drho(a, t) : drho(t, a); };
      auto eq = [&](int a) { return axis == 0 ? equilibrium.rho_eq_cell(a, t)
                                              : equilibrium.rho_eq_cell(t, a); };
      auto copy_rho = [&](int gi, int src) { cell(gi) = cell(src) + (eq(src) - eq(gi)); };
      for (int side = 0; side < 2; ++side) {
        const BoundaryKind kind = bc.kind(axis, side);
        for (int k = 1; k <= Grid::ghost; ++k) {
          const int gi = side == 0 ? -k : n - 1 + k;
          switch (kind) {
            case BoundaryKind::periodic:
              copy_rho(gi, detail::wrap(gi, n));
              break;
            case BoundaryKind::extrapolation:
              copy_rho(gi, detail::clamp_edge(gi, n));
              break;
            case BoundaryKind::no_flux: {
              const int src = detail::mirror(gi, n);
              if (ratio_mirror) cell(gi) = eq(gi) * (cell(src) / eq(src));
              else copy_rho(gi, src);
              break;
            }
            case BoundaryKind::dirichlet_equilibrium:
              cell(gi) = 0.0;
              break;
          }
        }
      }
    }
  }
}

/// delta(omega)_i = omega_{i+1/2} - omega_{i-1/2} for a face array.
inline void delta(std::span<const double> faces, std::span<double> cells) {
  if (faces.size() < 2 || cells.size() + 1 != faces.size())
    throw std::invalid_argument("delta: face array must have one more entry than cell array");
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = faces[i + 1] - faces[i];
}

/// mu(omega)_i = (omega_{i+1/2} + omega_{i-1/2}) / 2.
inline void mu(std::span<const double> faces, std::span<double> cells) {
  if (faces.size() < 2 || cells.size() + 1 != faces.size())
    throw std::invalid_argument("mu: face array must have one more entry than cell array");
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = 0.5 * (faces[i + 1] + faces[i]);
}

inline std::vector<double> delta(std::span<const double> faces) {
  if (faces.size() < 2) throw std::invalid_argument("delta: need at least two faces");
  std::vector<double> out(faces.size() - 1);
  delta(faces, out);
  return out;
}

inline std::vector<double> mu(std::span<const double> faces) {
  if (faces.size() < 2) throw std::invalid_argument("mu: need at least two faces");
  std::vector<double> out(faces.size() - 1);
  mu(faces, out);
  return out;
}

}  // namespace anelastic
