/// @file imex.hpp
/// @brief Additive IMEX Runge-Kutta tableau pairs (explicit + diagonally
/// implicit), their structural classification and order-condition checks.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "anelastic/mesh.hpp"

namespace anelastic {

/// Pair of Butcher tableaux. Nodes are the row sums of the matrices.
struct ImexTableau {
  std::string name;
  int order = 1;
  std::size_t stages = 0;
  std::vector<std::vector<double>> explicit_a;  // strictly lower triangular
  std::vector<std::vector<double>> implicit_a;  // lower triangular
  std::vector<double> explicit_weights;
  std::vector<double> implicit_weights;
  std::vector<double> explicit_nodes;
  std::vector<double> implicit_nodes;

  double a_explicit(std::size_t k, std::size_t l) const { return explicit_a[k][l]; }
  double a_implicit(std::size_t k, std::size_t l) const { return implicit_a[k][l]; }
  double diagonal(std::size_t k) const { return implicit_a[k][k]; }

  /// Throws ConfigError on shape or triangularity violations.
  void validate() const {
    const std::size_t s = stages;
    auto square = [s](const std::vector<std::vector<double>>& m) {
      if (m.size() != s) return false;
      for (const auto& row : m)
        if (row.size() != s) return false;
      return true;
    };
    if (s == 0 || !square(explicit_a) || !square(implicit_a) || explicit_weights.size() != s ||
        implicit_weights.size() != s || explicit_nodes.size() != s || implicit_nodes.size() != s)
      throw ConfigError("tableau '" + name + "' has inconsistent dimensions");
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) {
        if (j >= i && explicit_a[i][j] != 0.0)
          throw ConfigError("tableau '" + name + "': explicit matrix must be strictly lower triangular");
        if (j > i && implicit_a[i][j] != 0.0)
          throw ConfigError("tableau '" + name + "': implicit matrix must be lower triangular");
      }
  }
};

namespace detail {

inline std::vector<double> row_sums(const std::vector<std::vector<double>>& m) {
  std::vector<double> c;
  for (const auto& row : m) {
    double sum = 0.0;
    for (double v : row) sum += v;
    c.push_back(sum);
  }
  return c;
}

inline ImexTableau make_tableau(std::string name, int order,
                                std::vector<std::vector<double>> ea, std::vector<double> ew,
                                std::vector<std::vector<double>> ia, std::vector<double> iw) {
  ImexTableau t;
  t.name = std::move(name);
  t.order = order;
  t.stages = ew.size();
  t.explicit_nodes = row_sums(ea);
  t.implicit_nodes = row_sums(ia);
  t.explicit_a = std::move(ea);
  t.implicit_a = std::move(ia);
  t.explicit_weights = std::move(ew);
  t.implicit_weights = std::move(iw);
  t.validate();
  return t;
}

}  // namespace detail

struct TableauClass {
  bool type_a = false;
  bool type_ck = false;
  bool gsa = false;
};

/// type-A: every implicit diagonal entry non-zero. type-CK: zero first row
/// and a non-singular trailing block. GSA: last rows equal the weights exactly.
inline TableauClass classify(const ImexTableau& t) {
  TableauClass c;
  const std::size_t s = t.stages;
  c.type_a = true;
  for (std::size_t k = 0; k < s; ++k)
    if (t.implicit_a[k][k] == 0.0) c.type_a = false;
  if (s >= 2) {
    bool first_row_zero = true;
    for (double v : t.implicit_a[0])
      if (v != 0.0) first_row_zero = false;
    bool trailing_invertible = true;
    for (std::size_t k = 1; k < s; ++k)
      if (t.implicit_a[k][k] == 0.0) trailing_invertible = false;
    c.type_ck = first_row_zero && trailing_invertible;
  }
  c.gsa = true;
  for (std::size_t j = 0; j < s; ++j) {
    if (t.explicit_a[s - 1][j] != t.explicit_weights[j]) c.gsa = false;
    if (t.implicit_a[s - 1][j] != t.implicit_weights[j]) c.gsa = false;
  }
  return c;
}

/// Names accepted by builtin_tableau().
inline std::vector<std::string> builtin_tableau_names() {
  return {"ARS(1,1,1)", "DP-A(1,2,1)", "DP2-A(2,4,2)"};
}

inline ImexTableau builtin_tableau(const std::string& name, double beta = 0.7) {
  if (name == "ARS(1,1,1)" || name == "ars111") {
    return detail::make_tableau("ARS(1,1,1)", 1, {{0, 0}, {1, 0}}, {1, 0}, {{0, 0}, {0, 1}},
                                {0, 1});
  }
  if (name == "DP-A(1,2,1)" || name == "dpa121") {
    if (!(beta > 0.5)) throw ConfigError("DP-A(1,2,1) requires beta > 1/2");
    return detail::make_tableau("DP-A(1,2,1)", 1, {{0, 0}, {1, 0}}, {1, 0},
                                {{beta, 0}, {1 - beta, beta}}, {1 - beta, beta});
  }
  if (name == "DP2-A(2,4,2)" || name == "dp2a242") {
    if (!(beta > 0.0)) throw ConfigError("DP2-A(2,4,2) requires beta > 0");
    return detail::make_tableau(
        "DP2-A(2,4,2)", 2,
        {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}, {0, 0.5, 0.5, 0}}, {0, 0.5, 0.5, 0},
        {{beta, 0, 0, 0}, {-beta, beta, 0, 0}, {0, 1 - beta, beta, 0}, {0, 0.5, 0.5 - beta, beta}},
        {0, 0.5, 0.5 - beta, beta});
  }
  std::string known;
  for (const auto& n : builtin_tableau_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown tableau '" + name + "' (available: " + known + ")");
}

struct OrderCondition {
  std::string label;
  double residual = 0.0;
  bool satisfied = false;
};

struct OrderReport {
  std::vector<OrderCondition> conditions;
  bool all_satisfied() const {
    for (const auto& c : conditions)
      if (!c.satisfied) return false;
    return true;
  }
  const OrderCondition* find(const std::string& label) const {
    for (const auto& c : conditions)
      if (c.label == label) return &c;
    return nullptr;
  }
};

/// Additive order conditions up to order 2:
///   order 1: sum(w~) = sum(w) = 1;
///   order 2: sum(w~ c~) = sum(w c) = sum(w~ c) = sum(w c~) = 1/2.
inline OrderReport order_check(const ImexTableau& t, int target_order, double tol = 1e-14) {
  OrderReport r;
  auto add = [&](std::string label, double value, double target) {
    const double res = value - target;
    r.conditions.push_back({std::move(label), res, std::abs(res) <= tol});
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  const std::vector<double> ones(t.stages, 1.0);
  if (target_order >= 1) {
    add("sum(w_explicit)", dot(t.explicit_weights, ones), 1.0);
    add("sum(w_implicit)", dot(t.implicit_weights, ones), 1.0);
  }
  if (target_order >= 2) {
    add("sum(w_explicit c_explicit)", dot(t.explicit_weights, t.explicit_nodes), 0.5);
    add("sum(w_implicit c_implicit)", dot(t.implicit_weights, t.implicit_nodes), 0.5);
    add("sum(w_explicit c_implicit)", dot(t.explicit_weights, t.implicit_nodes), 0.5);
    add("sum(w_implicit c_explicit)", dot(t.implicit_weights, t.explicit_nodes), 0.5);
  }
  return r;
}

}  // namespace anelastic
