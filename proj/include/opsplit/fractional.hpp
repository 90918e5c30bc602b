#pragma once

// Fractional-step (operator-splitting) integration: a table of fractions
// alpha[k][ell] drives sub-integrations of the individual operators, each on
// its own clock. Fractions may be complex; the per-operator clocks then leave
// the real axis mid-step and return to it at the end of every macro step
// because each column of fractions sums to one.

#include <opsplit/core.hpp>
#include <opsplit/onestep.hpp>
#include <opsplit/tableau.hpp>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace opsplit {

template <class S>
struct SplittingScheme {
  std::vector<Vec<S>> alpha;  // stages x operators
  std::string name;
  int order = 1;

  SplittingScheme() = default;

  SplittingScheme(std::vector<Vec<S>> alpha_, std::string name_, int order_)
      : alpha(std::move(alpha_)), name(std::move(name_)), order(order_) {
    if (alpha.empty() || alpha.front().empty())
      throw UsageError("SplittingScheme: empty fraction table");
    const std::size_t n_ops = alpha.front().size();
    for (const auto& row : alpha)
      if (row.size() != n_ops)
        throw UsageError("SplittingScheme: ragged fraction table");
    if (order < 1) throw UsageError("SplittingScheme: order must be positive");
    for (std::size_t ell = 0; ell < n_ops; ++ell) {
      S colsum(0);
      for (const auto& row : alpha) colsum += row[ell];
      if (magnitude(colsum - S(1)) > 1e-13)
        throw UsageError("SplittingScheme '" + name +
                         "': fractions of operator " + std::to_string(ell + 1) +
                         " do not sum to one");
    }
  }

  std::size_t stages() const { return alpha.size(); }
  std::size_t n_operators() const { return alpha.front().size(); }
};

// max_ell | sum_k alpha[k][ell] - 1 |
template <class S>
double first_order_residual(const SplittingScheme<S>& scheme) {
  double worst = 0;
  for (std::size_t ell = 0; ell < scheme.n_operators(); ++ell) {
    S colsum(0);
    for (const auto& row : scheme.alpha) colsum += row[ell];
    worst = std::max(worst, static_cast<double>(magnitude(colsum - S(1))));
  }
  return worst;
}

// For every ordered pair of distinct operators (l, m), the fraction of the
// step in which operator l has already acted when operator m flows must
// average to 1/2 for second order; returns the worst deviation. Zero for any
// symmetric (time-reversible) table, 1/2 for the plain first-order sweep.
template <class S>
double second_order_residual(const SplittingScheme<S>& scheme) {
  const std::size_t n = scheme.n_operators();
  double worst = 0;
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t m = 0; m < n; ++m) {
      if (l == m) continue;
      S acc(0), seen_l(0);
      for (std::size_t k = 0; k < scheme.stages(); ++k) {
        S before = seen_l;
        if (l < m) before += scheme.alpha[k][l];  // same stage, l flows first
        acc += scheme.alpha[k][m] * before;
        seen_l += scheme.alpha[k][l];
      }
      worst = std::max(worst, static_cast<double>(magnitude(acc - S(0.5))));
    }
  }
  return worst;
}

// ---- sub-integrator selection ----

template <class S>
struct SingleRK {
  ButcherTableau<S> tableau;
  int substeps = 1;  // equal sub-steps across each fraction span
};

template <class S>
struct AdaptiveRK {
  EmbeddedTableau<S> pair;
  Tolerance tol{1e-12, 1e-10};
};

// Exact (or user-supplied) flow map: y(t0 + h) = flow(t0, y(t0), h).
template <class S>
struct AnalyticFlow {
  std::function<Vec<S>(S, const Vec<S>&, S)> flow;
};

template <class S>
using SubIntegrator = std::variant<SingleRK<S>, AdaptiveRK<S>, AnalyticFlow<S>>;

// Sub-integrator per (operator, stage), with a shared fallback. Keys are
// 1-based; stage 0 in a key means "any stage of that operator".
template <class S>
struct MethodMap {
  SubIntegrator<S> fallback;
  std::map<std::pair<std::size_t, std::size_t>, SubIntegrator<S>> overrides;

  static MethodMap uniform(SubIntegrator<S> m) { return {std::move(m), {}}; }

  const SubIntegrator<S>& lookup(std::size_t op, std::size_t stage) const {
    auto it = overrides.find({op, stage});
    if (it != overrides.end()) return it->second;
    it = overrides.find({op, std::size_t(0)});
    if (it != overrides.end()) return it->second;
    return fallback;
  }
};

// Single uniform fixed-step method of the order conventionally matched to a
// splitting of the given order.
template <class S>
MethodMap<S> default_methods_for_order(int order) {
  const char* name = order <= 1 ? "FE" : order == 2 ? "Heun2" : order == 3 ? "Kutta3" : "RK4";
  return MethodMap<S>::uniform(SingleRK<S>{builtin_tableau<S>(name), 1});
}

template <class S>
struct FlattenedStep {
  std::size_t stage, op;  // 1-based
  S alpha;
};

// The execution plan of one macro step: zero fractions are dropped before
// anything runs, so they never cost an evaluation.
template <class S>
std::vector<FlattenedStep<S>> nontrivial_steps(const SplittingScheme<S>& scheme) {
  std::vector<FlattenedStep<S>> plan;
  for (std::size_t k = 0; k < scheme.stages(); ++k)
    for (std::size_t ell = 0; ell < scheme.n_operators(); ++ell)
      if (scheme.alpha[k][ell] != S(0))
        plan.push_back({k + 1, ell + 1, scheme.alpha[k][ell]});
  return plan;
}

namespace detail {

template <class S>
Vec<S> run_sub(const SubIntegrator<S>& sub, const Operator<S>& f,
               const Jacobian<S>* jac, S t, Vec<S> y, S span,
               const NewtonOptions& nopts) {
  if (const auto* fixed = std::get_if<SingleRK<S>>(&sub)) {
    const int m = fixed->substeps;
    if (m < 1) throw UsageError("SingleRK: substeps must be positive");
    const S h = span / S(double(m));
    for (int i = 0; i < m; ++i)
      y = rk_step<S>(f, fixed->tableau, t + S(double(i)) * h, y, h, jac, nopts);
    return y;
  }
  if (const auto* ad = std::get_if<AdaptiveRK<S>>(&sub))
    return adaptive_integrate<S>(f, ad->pair, t, span, std::move(y), ad->tol,
                                 jac, {}, nopts);
  const auto& flow = std::get<AnalyticFlow<S>>(sub);
  if (!flow.flow) throw UsageError("AnalyticFlow: empty flow map");
  return flow.flow(t, y, span);
}

}  // namespace detail

// One macro step from t to t + dt. Every operator keeps its own clock,
// starting at t; the state chains through the sub-integrations in stage-major
// order with operators ascending within a stage. If clocks_out is non-null it
// receives the final per-operator clocks (t + dt up to round-off, since the
// fractions sum to one).
template <class S>
Vec<S> fractional_step(const AdditiveProblem<S>& problem,
                       const SplittingScheme<S>& scheme,
                       const MethodMap<S>& methods, S t, Vec<S> y, S dt,
                       const NewtonOptions& nopts = {},
                       Vec<S>* clocks_out = nullptr) {
  if (problem.n_operators() != scheme.n_operators())
    throw UsageError("fractional_step: scheme is for " +
                     std::to_string(scheme.n_operators()) + " operators, problem has " +
                     std::to_string(problem.n_operators()));
  Vec<S> clocks(scheme.n_operators(), t);
  for (const auto& step : nontrivial_steps(scheme)) {
    const std::size_t ell = step.op - 1;
    const S span = step.alpha * dt;
    y = detail::run_sub<S>(methods.lookup(step.op, step.stage),
                           problem.operators[ell], problem.jacobian(ell),
                           clocks[ell], std::move(y), span, nopts);
    clocks[ell] += span;
  }
  if (clocks_out) *clocks_out = clocks;
  return y;
}

// Fixed macro steps from t0 to tf (the last step is shortened to land on tf
// exactly); samples are recorded at every macro boundary. A non-finite state
// aborts with SolveError.
template <class S>
Trajectory<S> fractional_solve(const AdditiveProblem<S>& problem,
                               const SplittingScheme<S>& scheme,
                               const MethodMap<S>& methods, double t0, double tf,
                               double dt, const NewtonOptions& nopts = {}) {
  problem.validate();
  if (!(dt > 0) || !(tf > t0)) throw UsageError("fractional_solve: need tf > t0 and dt > 0");
  Trajectory<S> out;
  out.t.push_back(t0);
  out.y.push_back(problem.y0);
  double t = t0;
  Vec<S> y = problem.y0;
  const double tiny = 1e-12 * (tf - t0);
  while (t < tf - tiny) {
    const double h = std::min(dt, tf - t);
    y = fractional_step<S>(problem, scheme, methods, S(t), std::move(y), S(h), nopts);
    t += h;
    if (!all_finite(y))
      throw SolveError("fractional_solve: non-finite state at t = " + std::to_string(t));
    out.t.push_back(t);
    out.y.push_back(y);
  }
  return out;
}

}  // namespace opsplit
