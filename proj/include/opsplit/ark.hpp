#pragma once

// Additive Runge--Kutta methods: one Butcher tableau per operator, shared
// stage count. Stages are executed along the strongly-connected components
// of their dependency graph, so any mix of explicit, diagonally implicit,
// and mutually coupled stages works from one code path.

#include <opsplit/core.hpp>
#include <opsplit/newton.hpp>
#include <opsplit/onestep.hpp>
#include <opsplit/tableau.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace opsplit {

template <class S>
struct ArkMethod {
  std::vector<ButcherTableau<S>> tableaux;  // one per operator, equal stages
  std::vector<Vec<S>> b_hats;               // optional embedded weights, one per operator
  int order = 1;
  int order_hat = 0;  // order of the embedded solution when b_hats is set
  std::string name;

  ArkMethod() = default;

  ArkMethod(std::vector<ButcherTableau<S>> tabs, int order_, std::string name_,
            std::vector<Vec<S>> b_hats_ = {}, int order_hat_ = 0)
      : tableaux(std::move(tabs)),
        b_hats(std::move(b_hats_)),
        order(order_),
        order_hat(order_hat_),
        name(std::move(name_)) {
    if (tableaux.empty()) throw UsageError("ArkMethod: need at least one tableau");
    const std::size_t s = tableaux.front().stages();
    for (const auto& tab : tableaux)
      if (tab.stages() != s)
        throw UsageError("ArkMethod '" + name + "': tableaux disagree on stage count");
    if (!b_hats.empty()) {
      if (b_hats.size() != tableaux.size())
        throw UsageError("ArkMethod '" + name + "': need one b_hat per operator");
      for (const auto& bh : b_hats)
        if (bh.size() != s)
          throw UsageError("ArkMethod '" + name + "': b_hat length mismatch");
      if (order_hat < 1) order_hat = order - 1;
      if (order_hat < 1)
        throw UsageError("ArkMethod '" + name + "': embedded order must be positive");
    }
    if (order < 1) throw UsageError("ArkMethod: order must be positive");
  }

  std::size_t stages() const { return tableaux.front().stages(); }
  std::size_t n_operators() const { return tableaux.size(); }
  bool has_embedded() const { return !b_hats.empty(); }
};

struct StagePlanEntry {
  std::vector<std::size_t> stages;  // 0-based, coupled together
  bool implicit = false;
};

namespace detail {

// Which stage derivatives K[ell][j] the step actually uses.
template <class S>
std::vector<std::vector<bool>> needed_evals(const ArkMethod<S>& m) {
  const std::size_t s = m.stages(), N = m.n_operators();
  std::vector<std::vector<bool>> needed(N, std::vector<bool>(s, false));
  for (std::size_t ell = 0; ell < N; ++ell)
    for (std::size_t j = 0; j < s; ++j) {
      if (m.tableaux[ell].b[j] != S(0)) needed[ell][j] = true;
      if (m.has_embedded() && m.b_hats[ell][j] != S(0)) needed[ell][j] = true;
      for (std::size_t i = 0; i < s; ++i)
        if (m.tableaux[ell].A[i][j] != S(0)) needed[ell][j] = true;
    }
  return needed;
}

// Tarjan strongly-connected components of the stage dependency graph,
// returned in execution (topological) order.
inline std::vector<std::vector<std::size_t>> scc_order(
    const std::vector<std::vector<std::size_t>>& deps) {
  const std::size_t n = deps.size();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> sccs;
  int counter = 0;
  std::function<void(std::size_t)> strongconnect = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : deps[v]) {
      if (w == v) continue;
      if (index[w] < 0) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      for (;;) {
        std::size_t w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
        if (w == v) break;
      }
      std::sort(comp.begin(), comp.end());
      sccs.push_back(std::move(comp));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) strongconnect(v);
  // Tarjan emits components in reverse topological order of the condensation
  // when dependencies point at prerequisites; a dependency-closed emission
  // order is exactly what stage execution needs.
  return sccs;
}

}  // namespace detail

// The execution plan: groups of stages in dependency order, with unused
// stages dropped. A group is implicit when it couples several stages or a
// single stage refers to itself.
template <class S>
std::vector<StagePlanEntry> ark_stage_plan(const ArkMethod<S>& m) {
  const std::size_t s = m.stages(), N = m.n_operators();
  auto needed = detail::needed_evals(m);
  std::vector<std::vector<std::size_t>> deps(s);
  std::vector<bool> self_dep(s, false);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      bool coupled = false;
      for (std::size_t ell = 0; ell < N; ++ell)
        if (m.tableaux[ell].A[i][j] != S(0)) coupled = true;
      if (!coupled) continue;
      if (i == j)
        self_dep[i] = true;
      else
        deps[i].push_back(j);
    }
  std::vector<bool> stage_used(s, false);
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t ell = 0; ell < N; ++ell)
      if (needed[ell][j]) stage_used[j] = true;

  std::vector<StagePlanEntry> plan;
  for (auto& comp : detail::scc_order(deps)) {
    if (comp.size() == 1 && !stage_used[comp.front()]) continue;
    StagePlanEntry entry;
    entry.implicit = comp.size() > 1 || self_dep[comp.front()];
    entry.stages = std::move(comp);
    plan.push_back(std::move(entry));
  }
  return plan;
}

// One additive step from (t, y) over h. With embedded weights present and
// err_out non-null, *err_out receives the difference between the main and
// embedded solutions.
template <class S>
Vec<S> ark_step(const AdditiveProblem<S>& problem, const ArkMethod<S>& m, S t,
                const Vec<S>& y, S h, const NewtonOptions& nopts = {},
                Vec<S>* err_out = nullptr) {
  const std::size_t s = m.stages(), N = m.n_operators(), n = y.size();
  if (problem.n_operators() != N)
    throw UsageError("ark_step: method is for " + std::to_string(N) +
                     " operators, problem has " +
                     std::to_string(problem.n_operators()));
  auto needed = detail::needed_evals(m);
  std::vector<std::vector<Vec<S>>> K(N, std::vector<Vec<S>>(s));
  std::vector<Vec<S>> Y(s);

  // y + h * (known contributions to stage i from stages outside `group`)
  auto known_part = [&](std::size_t i, const std::vector<std::size_t>& group) {
    Vec<S> acc = y;
    for (std::size_t ell = 0; ell < N; ++ell)
      for (std::size_t j = 0; j < s; ++j) {
        if (m.tableaux[ell].A[i][j] == S(0)) continue;
        if (std::find(group.begin(), group.end(), j) != group.end()) continue;
        axpy(h * m.tableaux[ell].A[i][j], K[ell][j], acc);
      }
    return acc;
  };
  auto eval_stage = [&](std::size_t j) {
    for (std::size_t ell = 0; ell < N; ++ell)
      if (needed[ell][j]) {
        K[ell][j] = problem.operators[ell](t + m.tableaux[ell].c[j] * h, Y[j]);
        if (K[ell][j].size() != n)
          throw UsageError("ark_step: operator size mismatch");
      }
  };

  for (const auto& entry : ark_stage_plan(m)) {
    if (!entry.implicit) {
      const std::size_t i = entry.stages.front();
      Y[i] = known_part(i, {});
      eval_stage(i);
      continue;
    }
    const auto& group = entry.stages;
    const std::size_t g = group.size();
    std::vector<Vec<S>> known(g);
    for (std::size_t a = 0; a < g; ++a) known[a] = known_part(group[a], group);

    ResidualFn<S> res = [&](const Vec<S>& z) {
      std::vector<Vec<S>> F(g * N);
      for (std::size_t b = 0; b < g; ++b) {
        const std::size_t j = group[b];
        Vec<S> Yj(z.begin() + b * n, z.begin() + (b + 1) * n);
        for (std::size_t ell = 0; ell < N; ++ell) {
          bool used = false;
          for (std::size_t a = 0; a < g; ++a)
            if (m.tableaux[ell].A[group[a]][j] != S(0)) used = true;
          if (used) F[b * N + ell] =
              problem.operators[ell](t + m.tableaux[ell].c[j] * h, Yj);
        }
      }
      Vec<S> r(g * n);
      for (std::size_t a = 0; a < g; ++a) {
        const std::size_t i = group[a];
        for (std::size_t mcomp = 0; mcomp < n; ++mcomp) {
          S acc = z[a * n + mcomp] - known[a][mcomp];
          for (std::size_t b = 0; b < g; ++b)
            for (std::size_t ell = 0; ell < N; ++ell)
              if (m.tableaux[ell].A[i][group[b]] != S(0))
                acc -= h * m.tableaux[ell].A[i][group[b]] * F[b * N + ell][mcomp];
          r[a * n + mcomp] = acc;
        }
      }
      return r;
    };

    bool have_all_jacs = true;
    for (std::size_t ell = 0; ell < N; ++ell) {
      bool involved = false;
      for (std::size_t a = 0; a < g; ++a)
        for (std::size_t b = 0; b < g; ++b)
          if (m.tableaux[ell].A[group[a]][group[b]] != S(0)) involved = true;
      if (involved && !problem.jacobian(ell)) have_all_jacs = false;
    }
    ResidualJacFn<S> rjac;
    if (have_all_jacs) {
      rjac = [&](const Vec<S>& z) {
        std::vector<Vec<S>> out(g * n, Vec<S>(g * n, S(0)));
        for (std::size_t b = 0; b < g; ++b) {
          const std::size_t j = group[b];
          Vec<S> Yj(z.begin() + b * n, z.begin() + (b + 1) * n);
          for (std::size_t ell = 0; ell < N; ++ell) {
            bool used = false;
            for (std::size_t a = 0; a < g; ++a)
              if (m.tableaux[ell].A[group[a]][j] != S(0)) used = true;
            if (!used) continue;
            auto Jf = (*problem.jacobian(ell))(t + m.tableaux[ell].c[j] * h, Yj);
            for (std::size_t a = 0; a < g; ++a) {
              const S aij = m.tableaux[ell].A[group[a]][j];
              if (aij == S(0)) continue;
              for (std::size_t p = 0; p < n; ++p)
                for (std::size_t q = 0; q < n; ++q)
                  out[a * n + p][b * n + q] -= h * aij * Jf[p][q];
            }
          }
        }
        for (std::size_t d = 0; d < g * n; ++d) out[d][d] += S(1);
        return out;
      };
    }

    Vec<S> z0(g * n);
    for (std::size_t a = 0; a < g; ++a)
      for (std::size_t mcomp = 0; mcomp < n; ++mcomp) z0[a * n + mcomp] = y[mcomp];
    Vec<S> z = newton_solve<S>(res, std::move(z0), nopts, rjac).x;
    for (std::size_t a = 0; a < g; ++a) {
      Y[group[a]] = Vec<S>(z.begin() + a * n, z.begin() + (a + 1) * n);
      eval_stage(group[a]);
    }
  }

  Vec<S> out = y;
  for (std::size_t ell = 0; ell < N; ++ell)
    for (std::size_t j = 0; j < s; ++j)
      if (m.tableaux[ell].b[j] != S(0)) axpy(h * m.tableaux[ell].b[j], K[ell][j], out);
  if (err_out) {
    if (!m.has_embedded())
      throw UsageError("ark_step: method '" + m.name + "' has no embedded weights");
    err_out->assign(n, S(0));
    for (std::size_t ell = 0; ell < N; ++ell)
      for (std::size_t j = 0; j < s; ++j) {
        const S w = m.tableaux[ell].b[j] - m.b_hats[ell][j];
        if (w != S(0)) axpy(h * w, K[ell][j], *err_out);
      }
  }
  return out;
}

// Fixed-step driver; samples at every macro boundary.
template <class S>
Trajectory<S> ark_solve(const AdditiveProblem<S>& problem, const ArkMethod<S>& m,
                        double t0, double tf, double dt,
                        const NewtonOptions& nopts = {}) {
  problem.validate();
  if (!(dt > 0) || !(tf > t0)) throw UsageError("ark_solve: need tf > t0 and dt > 0");
  Trajectory<S> out;
  out.t.push_back(t0);
  out.y.push_back(problem.y0);
  double t = t0;
  Vec<S> y = problem.y0;
  const double tiny = 1e-12 * (tf - t0);
  while (t < tf - tiny) {
    const double h = std::min(dt, tf - t);
    y = ark_step<S>(problem, m, S(t), y, S(h), nopts);
    t += h;
    if (!all_finite(y))
      throw SolveError("ark_solve: non-finite state at t = " + std::to_string(t));
    out.t.push_back(t);
    out.y.push_back(y);
  }
  return out;
}

// Adaptive driver on the embedded error estimate; same controller as the
// single-operator ray integrator.
template <class S>
Trajectory<S> ark_solve_adaptive(const AdditiveProblem<S>& problem,
                                 const ArkMethod<S>& m, double t0, double tf,
                                 Tolerance tol, const StepController& ctrl = {},
                                 const NewtonOptions& nopts = {}) {
  problem.validate();
  if (!m.has_embedded())
    throw UsageError("ark_solve_adaptive: method '" + m.name +
                     "' has no embedded weights");
  if (!(tf > t0)) throw UsageError("ark_solve_adaptive: need tf > t0");
  Trajectory<S> out;
  out.t.push_back(t0);
  out.y.push_back(problem.y0);
  double t = t0;
  Vec<S> y = problem.y0;
  const double length = tf - t0;
  const double expo = -1.0 / (m.order_hat + 1);
  const double h_min = 1e-12 * length;
  double h = ctrl.h_init_fraction * length;
  Vec<S> err;
  while (t < tf - h_min) {
    if (h < h_min)
      throw SolveError("ark_solve_adaptive: step size underflow at t = " +
                       std::to_string(t));
    const double h_try = std::min(h, tf - t);
    Vec<S> y_new = ark_step<S>(problem, m, S(t), y, S(h_try), nopts, &err);
    const double est =
        all_finite(y_new) ? wrms_norm(err, y_new, tol) : std::nan("");
    if (std::isnan(est)) {
      h = h_try * ctrl.min_factor;
      continue;
    }
    if (est <= 1.0) {
      t += h_try;
      y = std::move(y_new);
      out.t.push_back(t);
      out.y.push_back(y);
      const double factor =
          est == 0.0 ? ctrl.max_factor
                     : std::clamp(ctrl.safety * std::pow(est, expo),
                                  ctrl.min_factor, ctrl.max_factor);
      h = h_try * factor;
    } else {
      h = h_try *
          std::clamp(ctrl.safety * std::pow(est, expo), ctrl.min_factor, 1.0);
    }
  }
  return out;
}

}  // namespace opsplit
