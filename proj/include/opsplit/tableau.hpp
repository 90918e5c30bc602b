#pragma once

// Butcher-tableau data types, structural classification, and the built-in
// single-method Runge--Kutta catalog used as sub-integrators.

#include <opsplit/core.hpp>

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace opsplit {

template <class S>
struct ButcherTableau {
  std::vector<Vec<S>> A;  // s x s stage coefficients
  Vec<S> b;               // length-s weights
  Vec<S> c;               // length-s abscissae, c_i = sum_j A_ij
  int order = 1;

  ButcherTableau() = default;

  // c defaults to the row sums of A; an explicitly supplied c must match them
  // to 1e-14 componentwise.
  ButcherTableau(std::vector<Vec<S>> A_, Vec<S> b_, int order_, Vec<S> c_ = {})
      : A(std::move(A_)), b(std::move(b_)), c(std::move(c_)), order(order_) {
    const std::size_t s = b.size();
    if (s == 0) throw UsageError("ButcherTableau: empty method");
    if (order < 1) throw UsageError("ButcherTableau: order must be positive");
    if (A.size() != s) throw UsageError("ButcherTableau: A must be s x s");
    for (const auto& row : A)
      if (row.size() != s) throw UsageError("ButcherTableau: A must be s x s");
    if (c.empty()) {
      c.resize(s, S(0));
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) c[i] += A[i][j];
    } else {
      if (c.size() != s) throw UsageError("ButcherTableau: c length mismatch");
      for (std::size_t i = 0; i < s; ++i) {
        S rowsum(0);
        for (std::size_t j = 0; j < s; ++j) rowsum += A[i][j];
        if (magnitude(c[i] - rowsum) > 1e-14)
          throw UsageError("ButcherTableau: c is not the row sums of A");
      }
    }
  }

  std::size_t stages() const { return b.size(); }
};

template <class S>
struct EmbeddedTableau {
  ButcherTableau<S> base;
  Vec<S> b_hat;  // embedded weights, order order_hat
  int order_hat = 1;

  EmbeddedTableau() = default;

  EmbeddedTableau(ButcherTableau<S> base_, Vec<S> b_hat_, int order_hat_)
      : base(std::move(base_)), b_hat(std::move(b_hat_)), order_hat(order_hat_) {
    if (b_hat.size() != base.stages())
      throw UsageError("EmbeddedTableau: b_hat length mismatch");
    if (order_hat < 1) throw UsageError("EmbeddedTableau: order_hat must be positive");
    bool differs = false;
    for (std::size_t i = 0; i < b_hat.size(); ++i)
      if (magnitude(b_hat[i] - base.b[i]) > 0) differs = true;
    if (!differs) throw UsageError("EmbeddedTableau: b_hat equals b");
  }
};

enum class TableauClass { Explicit, DiagonallyImplicit, FullyImplicit };

inline const char* to_string(TableauClass c) {
  switch (c) {
    case TableauClass::Explicit: return "Explicit";
    case TableauClass::DiagonallyImplicit: return "DiagonallyImplicit";
    default: return "FullyImplicit";
  }
}

// Zero tests use exact equality on the stored coefficients.
template <class S>
TableauClass classify(const ButcherTableau<S>& tab) {
  const std::size_t s = tab.stages();
  bool upper = false, diag = false;
  for (std::size_t i = 0; i < s; ++i) {
    if (tab.A[i][i] != S(0)) diag = true;
    for (std::size_t j = i + 1; j < s; ++j)
      if (tab.A[i][j] != S(0)) upper = true;
  }
  if (upper) return TableauClass::FullyImplicit;
  return diag ? TableauClass::DiagonallyImplicit : TableauClass::Explicit;
}

namespace detail {

template <class S>
ButcherTableau<S> lift_tableau(const std::vector<std::vector<double>>& A,
                               const std::vector<double>& b, int order) {
  std::vector<Vec<S>> As(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) As[i] = Vec<S>(A[i].begin(), A[i].end());
  return ButcherTableau<S>(std::move(As), Vec<S>(b.begin(), b.end()), order);
}

}  // namespace detail

template <class S>
using AnyTableau = std::variant<ButcherTableau<S>, EmbeddedTableau<S>>;

inline const std::vector<std::string>& rk_builtin_names() {
  static const std::vector<std::string> names = {
      "FE", "BE", "Heun2", "Kutta3", "RK4", "ImplicitTrapezoidal", "DP54"};
  return names;
}

// Standard textbook coefficients; DP54 is the embedded 5(4) pair.
template <class S>
AnyTableau<S> builtin(const std::string& name) {
  using detail::lift_tableau;
  if (name == "FE") return lift_tableau<S>({{0}}, {1}, 1);
  if (name == "BE") return lift_tableau<S>({{1}}, {1}, 1);
  if (name == "Heun2") return lift_tableau<S>({{0, 0}, {1, 0}}, {0.5, 0.5}, 2);
  if (name == "Kutta3")
    return lift_tableau<S>({{0, 0, 0}, {0.5, 0, 0}, {-1, 2, 0}},
                           {1.0 / 6, 2.0 / 3, 1.0 / 6}, 3);
  if (name == "RK4")
    return lift_tableau<S>(
        {{0, 0, 0, 0}, {0.5, 0, 0, 0}, {0, 0.5, 0, 0}, {0, 0, 1, 0}},
        {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}, 4);
  if (name == "ImplicitTrapezoidal")
    return lift_tableau<S>({{0, 0}, {0.5, 0.5}}, {0.5, 0.5}, 2);
  if (name == "DP54") {
    ButcherTableau<S> base = lift_tableau<S>(
        {{0, 0, 0, 0, 0, 0, 0},
         {1.0 / 5, 0, 0, 0, 0, 0, 0},
         {3.0 / 40, 9.0 / 40, 0, 0, 0, 0, 0},
         {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0, 0},
         {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0, 0},
         {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0, 0},
         {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0}},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0}, 5);
    std::vector<double> bh = {5179.0 / 57600,    0,           7571.0 / 16695, 393.0 / 640,
                              -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
    return EmbeddedTableau<S>(std::move(base), Vec<S>(bh.begin(), bh.end()), 4);
  }
  std::string msg = "unknown Runge-Kutta method '" + name + "'; available:";
  for (const auto& n : rk_builtin_names()) msg += " " + n;
  throw UsageError(msg);
}

// The plain tableau behind a builtin name (base tableau for embedded pairs).
template <class S>
ButcherTableau<S> builtin_tableau(const std::string& name) {
  AnyTableau<S> any = builtin<S>(name);
  if (std::holds_alternative<ButcherTableau<S>>(any))
    return std::get<ButcherTableau<S>>(any);
  return std::get<EmbeddedTableau<S>>(any).base;
}

// The embedded pair behind a builtin name; errors for plain methods.
template <class S>
EmbeddedTableau<S> builtin_embedded(const std::string& name) {
  AnyTableau<S> any = builtin<S>(name);
  if (!std::holds_alternative<EmbeddedTableau<S>>(any))
    throw UsageError("method '" + name + "' has no embedded error estimate");
  return std::get<EmbeddedTableau<S>>(any);
}

}  // namespace opsplit
