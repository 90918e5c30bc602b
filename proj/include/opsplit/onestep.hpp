#pragma once

// Single Runge--Kutta steps (explicit, diagonally implicit, fully implicit)
// plus an embedded-pair adaptive integrator that follows a straight ray in
// the scalar field, so steps with complex increments reduce to a real
// adaptive sweep along the ray.

#include <opsplit/core.hpp>
#include <opsplit/newton.hpp>
#include <opsplit/tableau.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace opsplit {

struct StepController {
  double safety = 0.9;
  double min_factor = 0.2;
  double max_factor = 5.0;
  double h_init_fraction = 1e-2;  // first trial step as a fraction of the span
};

namespace detail {

// Stage derivatives K_i = f(t + c_i h, Y_i); shared by plain and embedded
// steps. Implicit stages go through newton_solve with the stage value as
// unknown, seeded with y; K is then recovered algebraically for diagonal
// stages and by evaluation for coupled ones.
template <class S>
std::vector<Vec<S>> rk_stages(const Operator<S>& f, const ButcherTableau<S>& tab,
                              S t, const Vec<S>& y, S h,
                              const Jacobian<S>* jac = nullptr,
                              const NewtonOptions& nopts = {},
                              const Vec<S>* extra_weights = nullptr) {
  const std::size_t s = tab.stages();
  const std::size_t n = y.size();
  std::vector<Vec<S>> K(s);

  // A stage feeding no later stage and carrying no weight never needs its
  // derivative (e.g. a trailing first-same-as-last stage).
  std::vector<bool> needed(s, false);
  for (std::size_t j = 0; j < s; ++j) {
    if (tab.b[j] != S(0)) needed[j] = true;
    if (extra_weights && (*extra_weights)[j] != S(0)) needed[j] = true;
    for (std::size_t i = 0; i < s; ++i)
      if (tab.A[i][j] != S(0)) needed[j] = true;
  }

  if (classify(tab) != TableauClass::FullyImplicit) {
    Vec<S> Yi(n);
    for (std::size_t i = 0; i < s; ++i) {
      if (!needed[i]) continue;
      Vec<S> known = y;
      for (std::size_t j = 0; j < i; ++j)
        if (tab.A[i][j] != S(0)) axpy(h * tab.A[i][j], K[j], known);
      const S aii = tab.A[i][i];
      const S ti = t + tab.c[i] * h;
      if (aii == S(0)) {
        K[i] = f(ti, known);
      } else {
        ResidualFn<S> res = [&](const Vec<S>& x) {
          Vec<S> r = f(ti, x);
          for (std::size_t m = 0; m < n; ++m)
            r[m] = x[m] - known[m] - h * aii * r[m];
          return r;
        };
        ResidualJacFn<S> rjac;
        if (jac && *jac) {
          rjac = [&, ti](const Vec<S>& x) {
            std::vector<Vec<S>> J = (*jac)(ti, x);
            for (std::size_t p = 0; p < n; ++p)
              for (std::size_t q = 0; q < n; ++q) {
                J[p][q] = -h * aii * J[p][q];
                if (p == q) J[p][q] += S(1);
              }
            return J;
          };
        }
        Yi = newton_solve<S>(res, y, nopts, rjac).x;
        K[i] = Yi;
        for (std::size_t m = 0; m < n; ++m)
          K[i][m] = (Yi[m] - known[m]) / (h * aii);
      }
      if (K[i].size() != n) throw UsageError("rk_step: operator size mismatch");
    }
    return K;
  }

  // Fully implicit: one coupled system in all s*n stage values.
  Vec<S> z0(s * n);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t m = 0; m < n; ++m) z0[i * n + m] = y[m];
  ResidualFn<S> res = [&](const Vec<S>& z) {
    std::vector<Vec<S>> F(s);
    for (std::size_t j = 0; j < s; ++j) {
      Vec<S> Yj(z.begin() + j * n, z.begin() + (j + 1) * n);
      F[j] = f(t + tab.c[j] * h, Yj);
      if (F[j].size() != n) throw UsageError("rk_step: operator size mismatch");
    }
    Vec<S> r(s * n);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t m = 0; m < n; ++m) {
        S acc = z[i * n + m] - y[m];
        for (std::size_t j = 0; j < s; ++j) acc -= h * tab.A[i][j] * F[j][m];
        r[i * n + m] = acc;
      }
    return r;
  };
  ResidualJacFn<S> rjac;
  if (jac && *jac) {
    rjac = [&](const Vec<S>& z) {
      std::vector<Vec<S>> out(s * n, Vec<S>(s * n, S(0)));
      for (std::size_t j = 0; j < s; ++j) {
        Vec<S> Yj(z.begin() + j * n, z.begin() + (j + 1) * n);
        std::vector<Vec<S>> Jf = (*jac)(t + tab.c[j] * h, Yj);
        for (std::size_t i = 0; i < s; ++i) {
          if (tab.A[i][j] == S(0)) continue;
          for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q)
              out[i * n + p][j * n + q] -= h * tab.A[i][j] * Jf[p][q];
        }
      }
      for (std::size_t d = 0; d < s * n; ++d) out[d][d] += S(1);
      return out;
    };
  }
  Vec<S> z = newton_solve<S>(res, std::move(z0), nopts, rjac).x;
  for (std::size_t j = 0; j < s; ++j) {
    Vec<S> Yj(z.begin() + j * n, z.begin() + (j + 1) * n);
    K[j] = f(t + tab.c[j] * h, Yj);
  }
  return K;
}

}  // namespace detail

// One step of the given method; a zero step returns y without evaluating f.
template <class S>
Vec<S> rk_step(const Operator<S>& f, const ButcherTableau<S>& tab, S t,
               const Vec<S>& y, S h, const Jacobian<S>* jac = nullptr,
               const NewtonOptions& nopts = {}) {
  if (h == S(0)) return y;
  auto K = detail::rk_stages(f, tab, t, y, h, jac, nopts);
  Vec<S> out = y;
  for (std::size_t i = 0; i < tab.stages(); ++i)
    if (tab.b[i] != S(0)) axpy(h * tab.b[i], K[i], out);
  return out;
}

// One step of an embedded pair: both solutions from one set of stages.
template <class S>
std::pair<Vec<S>, Vec<S>> embedded_step(const Operator<S>& f,
                                        const EmbeddedTableau<S>& pair, S t,
                                        const Vec<S>& y, S h,
                                        const Jacobian<S>* jac = nullptr,
                                        const NewtonOptions& nopts = {}) {
  if (h == S(0)) return {y, y};
  auto K = detail::rk_stages(f, pair.base, t, y, h, jac, nopts, &pair.b_hat);
  Vec<S> hi = y, lo = y;
  for (std::size_t i = 0; i < pair.base.stages(); ++i) {
    if (pair.base.b[i] != S(0)) axpy(h * pair.base.b[i], K[i], hi);
    if (pair.b_hat[i] != S(0)) axpy(h * pair.b_hat[i], K[i], lo);
  }
  return {std::move(hi), std::move(lo)};
}

// Integrates v' = f(t, v) from t0 to t0 + span with adaptive step control.
// The span may point anywhere in the scalar field: the solver follows the ray
// t0 + tau * span/|span| with a real arc-length parameter tau in [0, |span|],
// so only the direction factor is complex.
template <class S>
Vec<S> adaptive_integrate(const Operator<S>& f, const EmbeddedTableau<S>& pair,
                          S t0, S span, Vec<S> y, Tolerance tol,
                          const Jacobian<S>* jac = nullptr,
                          const StepController& ctrl = {},
                          const NewtonOptions& nopts = {}) {
  if (span == S(0)) return y;
  const double length = magnitude(span);
  const S dir = span / S(length);
  Operator<S> g = [&](S tau, const Vec<S>& v) {
    Vec<S> dv = f(t0 + dir * tau, v);
    for (S& x : dv) x *= dir;
    return dv;
  };
  Jacobian<S> gjac;
  if (jac && *jac) {
    gjac = [&](S tau, const Vec<S>& v) {
      std::vector<Vec<S>> J = (*jac)(t0 + dir * tau, v);
      for (auto& row : J)
        for (S& x : row) x *= dir;
      return J;
    };
  }
  const Jacobian<S>* gjac_ptr = gjac ? &gjac : nullptr;

  const double expo = -1.0 / (pair.order_hat + 1);
  const double h_min = 1e-12 * length;
  double tau = 0;
  double h = ctrl.h_init_fraction * length;
  while (tau < length) {
    if (h < h_min)
      throw SolveError("adaptive_integrate: step size underflow at tau = " +
                       std::to_string(tau));
    const double h_try = std::min(h, length - tau);
    auto [hi, lo] = embedded_step<S>(g, pair, S(tau), y, S(h_try), gjac_ptr, nopts);
    Vec<S> err = vdiff(hi, lo);
    const double est = all_finite(hi) && all_finite(lo)
                           ? wrms_norm(err, hi, tol)
                           : std::nan("");
    if (std::isnan(est)) {
      h = h_try * ctrl.min_factor;
      continue;
    }
    if (est <= 1.0) {
      tau += h_try;
      y = std::move(hi);
      const double factor =
          est == 0.0 ? ctrl.max_factor
                     : std::clamp(ctrl.safety * std::pow(est, expo),
                                  ctrl.min_factor, ctrl.max_factor);
      h = h_try * factor;
    } else {
      h = h_try * std::clamp(ctrl.safety * std::pow(est, expo), ctrl.min_factor,
                             1.0);
    }
  }
  return y;
}

}  // namespace opsplit
