#pragma once

// Multirate infinitesimal methods: slow stages advance either through a fast
// auxiliary IVP with a polynomial forcing built from slow derivatives, or,
// where the abscissa does not move, through a plain (possibly implicit)
// update. The implicit-capable slow operator comes first, an optional second
// explicit slow operator next, and the fast operator always last.

#include <opsplit/core.hpp>
#include <opsplit/gark.hpp>
#include <opsplit/newton.hpp>
#include <opsplit/onestep.hpp>
#include <opsplit/tableau.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace opsplit {

template <class S>
struct MriMethod {
  std::vector<double> c;          // slow abscissae, c.front() = 0, c.back() = 1
  std::vector<Matrix<S>> Gammas;  // polynomial coefficients, implicit-capable part
  std::vector<Matrix<S>> Omegas;  // polynomial coefficients, explicit part (optional)
  int order = 1;
  std::string name;

  MriMethod() = default;

  MriMethod(std::vector<double> c_, std::vector<Matrix<S>> Gammas_,
            std::vector<Matrix<S>> Omegas_, int order_, std::string name_)
      : c(std::move(c_)),
        Gammas(std::move(Gammas_)),
        Omegas(std::move(Omegas_)),
        order(order_),
        name(std::move(name_)) {
    const std::size_t s = c.size();
    if (s < 2) throw UsageError("MriMethod '" + name + "': need at least two stages");
    if (c.front() != 0.0)
      throw UsageError("MriMethod '" + name + "': first abscissa must be zero");
    for (std::size_t i = 1; i < s; ++i)
      if (c[i] < c[i - 1])
        throw UsageError("MriMethod '" + name + "': abscissae must be nondecreasing");
    if (std::abs(c.back() - 1.0) > 1e-12)
      throw UsageError("MriMethod '" + name + "': last abscissa must be one");
    if (Gammas.empty()) throw UsageError("MriMethod '" + name + "': no coefficients");
    if (order < 1) throw UsageError("MriMethod: order must be positive");
    auto check_family = [&](const std::vector<Matrix<S>>& fam, const char* label,
                            bool allow_diagonal) {
      for (const auto& G : fam) {
        if (G.size() != s)
          throw UsageError("MriMethod '" + name + "': " + label + " row count");
        for (const auto& row : G)
          if (row.size() != s)
            throw UsageError("MriMethod '" + name + "': " + label + " column count");
        for (std::size_t i = 0; i < s; ++i)
          for (std::size_t j = 0; j < s; ++j) {
            const bool moving = i > 0 && c[i] != c[i - 1];
            const std::size_t limit = (moving || !allow_diagonal) ? i : i + 1;
            if (j >= limit && G[i][j] != S(0))
              throw UsageError("MriMethod '" + name + "': " + label +
                               " must vanish at and beyond the diagonal of row " +
                               std::to_string(i + 1));
          }
        for (const S& x : G.front())
          if (x != S(0))
            throw UsageError("MriMethod '" + name + "': first " + label +
                             " row must be zero");
      }
    };
    check_family(Gammas, "Gamma", true);
    check_family(Omegas, "Omega", false);
    auto check_rows = [&](const Matrix<S>& bar, const char* label) {
      for (std::size_t i = 1; i < s; ++i) {
        S sum(0);
        for (const S& x : bar[i]) sum += x;
        if (magnitude(sum - S(c[i] - c[i - 1])) > 1e-12)
          throw UsageError("MriMethod '" + name + "': " + label + " row " +
                           std::to_string(i + 1) +
                           " does not integrate to the abscissa increment");
      }
    };
    check_rows(family_bar(Gammas, s), "Gamma");
    if (!Omegas.empty()) check_rows(family_bar(Omegas, s), "Omega");
  }

  std::size_t stages() const { return c.size(); }
  bool imex() const { return !Omegas.empty(); }
  std::size_t n_operators() const { return imex() ? 3 : 2; }

  static Matrix<S> family_bar(const std::vector<Matrix<S>>& fam, std::size_t s) {
    Matrix<S> bar(s, Vec<S>(s, S(0)));
    for (std::size_t k = 0; k < fam.size(); ++k)
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j)
          bar[i][j] += fam[k][i][j] / S(double(k + 1));
    return bar;
  }

};

// sum_k Gamma^k / (k+1): the unit-interval integral of the coefficient
// polynomials; drives the fixed-abscissa stage updates.
template <class S>
Matrix<S> gamma_bar(const MriMethod<S>& m) {
  return MriMethod<S>::family_bar(m.Gammas, m.stages());
}

template <class S>
Matrix<S> omega_bar(const MriMethod<S>& m) {
  if (!m.imex()) throw UsageError("omega_bar: method '" + m.name + "' has no explicit part");
  return MriMethod<S>::family_bar(m.Omegas, m.stages());
}

// Coefficient polynomials evaluated at normalized time tau in [0,1].
template <class S>
Matrix<S> gamma_at(const MriMethod<S>& m, double tau) {
  const std::size_t s = m.stages();
  Matrix<S> out(s, Vec<S>(s, S(0)));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      S acc(0);
      for (std::size_t k = m.Gammas.size(); k-- > 0;)
        acc = acc * S(tau) + m.Gammas[k][i][j];
      out[i][j] = acc;
    }
  return out;
}

template <class S>
Matrix<S> omega_at(const MriMethod<S>& m, double tau) {
  if (!m.imex()) throw UsageError("omega_at: method '" + m.name + "' has no explicit part");
  const std::size_t s = m.stages();
  Matrix<S> out(s, Vec<S>(s, S(0)));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      S acc(0);
      for (std::size_t k = m.Omegas.size(); k-- > 0;)
        acc = acc * S(tau) + m.Omegas[k][i][j];
      out[i][j] = acc;
    }
  return out;
}

template <class S>
struct FastSolveConfig {
  EmbeddedTableau<S> pair = builtin_embedded<S>("DP54");
  Tolerance tol{1e-12, 1e-10};
};

// One slow macro step from (t, y) over h. problem.operators is
// (slow-implicit, fast) or (slow-implicit, slow-explicit, fast).
template <class S>
Vec<S> mri_step(const AdditiveProblem<S>& problem, const MriMethod<S>& m, S t,
                const Vec<S>& y, S h, const FastSolveConfig<S>& fast = {},
                const NewtonOptions& nopts = {}) {
  const std::size_t s = m.stages();
  if (problem.n_operators() != m.n_operators())
    throw UsageError("mri_step: method '" + m.name + "' needs " +
                     std::to_string(m.n_operators()) + " operators");
  const Operator<S>& f_I = problem.operators[0];
  const Operator<S>* f_E = m.imex() ? &problem.operators[1] : nullptr;
  const Operator<S>& f_F = problem.operators.back();
  const std::size_t n = y.size();

  // Slow derivatives, evaluated at most once per stage on first use.
  std::vector<std::optional<Vec<S>>> KI(s), KE(s);
  std::vector<Vec<S>> Y(s);
  Y[0] = y;
  auto get_KI = [&](std::size_t j) -> const Vec<S>& {
    if (!KI[j]) KI[j] = f_I(t + S(m.c[j]) * h, Y[j]);
    return *KI[j];
  };
  auto get_KE = [&](std::size_t j) -> const Vec<S>& {
    if (!KE[j]) KE[j] = (*f_E)(t + S(m.c[j]) * h, Y[j]);
    return *KE[j];
  };

  const Matrix<S> gbar = gamma_bar(m);
  const Matrix<S> obar = m.imex() ? omega_bar(m) : Matrix<S>{};

  for (std::size_t i = 1; i < s; ++i) {
    const double dc = m.c[i] - m.c[i - 1];
    if (dc != 0.0) {
      // Fast auxiliary IVP over [0, h]: v' = dc*f_F + polynomial forcing.
      const S T_prev = t + S(m.c[i - 1]) * h;
      // gather the nonzero forcing terms of this stage once
      std::vector<std::size_t> gj, oj;
      for (std::size_t j = 0; j < i; ++j) {
        bool gnz = false, onz = false;
        for (const auto& G : m.Gammas)
          if (G[i][j] != S(0)) gnz = true;
        for (const auto& O : m.Omegas)
          if (O[i][j] != S(0)) onz = true;
        if (gnz) gj.push_back(j);
        if (onz) oj.push_back(j);
      }
      for (std::size_t j : gj) get_KI(j);
      for (std::size_t j : oj) get_KE(j);
      Operator<S> faug = [&](S theta, const Vec<S>& v) {
        // theta runs along the ray toward h, so theta/h is real in [0,1]
        const double tau = static_cast<double>(real_part(theta / h));
        Vec<S> dv = f_F(T_prev + S(dc) * theta, v);
        for (S& x : dv) x *= S(dc);
        for (std::size_t j : gj) {
          S w(0);
          for (std::size_t k = m.Gammas.size(); k-- > 0;)
            w = w * S(tau) + m.Gammas[k][i][j];
          axpy(w, *KI[j], dv);
        }
        for (std::size_t j : oj) {
          S w(0);
          for (std::size_t k = m.Omegas.size(); k-- > 0;)
            w = w * S(tau) + m.Omegas[k][i][j];
          axpy(w, *KE[j], dv);
        }
        return dv;
      };
      Y[i] = adaptive_integrate<S>(faug, fast.pair, S(0), h, Y[i - 1], fast.tol);
    } else {
      Vec<S> known = Y[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        if (gbar[i][j] != S(0)) axpy(h * gbar[i][j], get_KI(j), known);
        if (m.imex() && obar[i][j] != S(0)) axpy(h * obar[i][j], get_KE(j), known);
      }
      const S gii = gbar[i][i];
      if (gii == S(0)) {
        Y[i] = std::move(known);
      } else {
        const S ti = t + S(m.c[i]) * h;
        ResidualFn<S> res = [&](const Vec<S>& x) {
          Vec<S> r = f_I(ti, x);
          for (std::size_t p = 0; p < n; ++p)
            r[p] = x[p] - known[p] - h * gii * r[p];
          return r;
        };
        ResidualJacFn<S> rjac;
        if (const Jacobian<S>* J = problem.jacobian(0)) {
          rjac = [&, J, ti](const Vec<S>& x) {
            auto Jf = (*J)(ti, x);
            for (std::size_t p = 0; p < n; ++p)
              for (std::size_t q = 0; q < n; ++q) {
                Jf[p][q] = -h * gii * Jf[p][q];
                if (p == q) Jf[p][q] += S(1);
              }
            return Jf;
          };
        }
        Y[i] = newton_solve<S>(res, Y[i - 1], nopts, rjac).x;
      }
    }
  }
  return Y[s - 1];
}

template <class S>
Trajectory<S> mri_solve(const AdditiveProblem<S>& problem, const MriMethod<S>& m,
                        double t0, double tf, double dt,
                        const FastSolveConfig<S>& fast = {},
                        const NewtonOptions& nopts = {}) {
  problem.validate();
  if (!(dt > 0) || !(tf > t0)) throw UsageError("mri_solve: need tf > t0 and dt > 0");
  Trajectory<S> out;
  out.t.push_back(t0);
  out.y.push_back(problem.y0);
  double t = t0;
  Vec<S> y = problem.y0;
  const double tiny = 1e-12 * (tf - t0);
  while (t < tf - tiny) {
    const double h = std::min(dt, tf - t);
    y = mri_step<S>(problem, m, S(t), y, S(h), fast, nopts);
    t += h;
    if (!all_finite(y))
      throw SolveError("mri_solve: non-finite state at t = " + std::to_string(t));
    out.t.push_back(t);
    out.y.push_back(y);
  }
  return out;
}

}  // namespace opsplit
