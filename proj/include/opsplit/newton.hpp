#pragma once

// Damped Newton iteration for the implicit stage equations, with a one-sided
// finite-difference Jacobian by default and optional analytic Jacobian.
// Dense linear algebra lives behind this header only.

#include <opsplit/core.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>

namespace opsplit {

struct NewtonOptions {
  double tol = 1e-12;      // accept when wrms(residual, x, {tol,tol}) <= 1
  int max_iter = 50;
  double fd_epsilon = 1e-8;
  int max_backtracks = 8;
};

template <class S>
struct NewtonResult {
  Vec<S> x;
  int iterations = 0;
  double residual_wrms = 0;
};

template <class S>
using ResidualFn = std::function<Vec<S>(const Vec<S>&)>;
template <class S>
using ResidualJacFn = std::function<std::vector<Vec<S>>(const Vec<S>&)>;

namespace detail {

template <class S>
double vec_norm2(const Vec<S>& v) {
  double acc = 0;
  for (const S& x : v) acc += magnitude(x) * magnitude(x);
  return std::sqrt(acc);
}

// One-sided differences along the real axis; the perturbation scale follows
// the magnitude of each component.
template <class S>
std::vector<Vec<S>> fd_jacobian(const ResidualFn<S>& residual, const Vec<S>& x,
                                const Vec<S>& r0, double eps) {
  const std::size_t n = x.size();
  std::vector<Vec<S>> J(n, Vec<S>(n, S(0)));
  Vec<S> xp = x;
  for (std::size_t j = 0; j < n; ++j) {
    const double delta = eps * (1.0 + magnitude(x[j]));
    xp[j] = x[j] + S(delta);
    Vec<S> rj = residual(xp);
    xp[j] = x[j];
    if (rj.size() != n) throw UsageError("newton_solve: residual changed size");
    for (std::size_t i = 0; i < n; ++i) J[i][j] = (rj[i] - r0[i]) / S(delta);
  }
  return J;
}

template <class S>
Vec<S> lu_solve(const std::vector<Vec<S>>& J, const Vec<S>& rhs) {
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  const std::size_t n = rhs.size();
  Matrix M(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) = J[i][j];
  Vector b(n);
  for (std::size_t i = 0; i < n; ++i) b(i) = rhs[i];
  Vector sol = M.partialPivLu().solve(b);
  Vec<S> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sol(i);
  return out;
}

}  // namespace detail

// Solves residual(x) = 0 starting from x0. A supplied jac must return the
// dense row-major Jacobian of the residual; otherwise finite differences are
// used. Throws SolveError (carrying the last residual norm) on breakdown or
// when max_iter is exhausted.
template <class S>
NewtonResult<S> newton_solve(const ResidualFn<S>& residual, Vec<S> x0,
                             const NewtonOptions& opts = {},
                             const ResidualJacFn<S>& jac = nullptr) {
  const std::size_t n = x0.size();
  if (n == 0) throw UsageError("newton_solve: empty system");
  Tolerance stop{opts.tol, opts.tol};
  Vec<S> x = std::move(x0);
  Vec<S> r = residual(x);
  if (r.size() != n) throw UsageError("newton_solve: residual size mismatch");
  double rfit = wrms_norm(r, x, stop);
  if (rfit <= 1.0) return {std::move(x), 0, rfit};

  for (int it = 1; it <= opts.max_iter; ++it) {
    std::vector<Vec<S>> J =
        jac ? jac(x) : detail::fd_jacobian<S>(residual, x, r, opts.fd_epsilon);
    if (J.size() != n) throw UsageError("newton_solve: jacobian size mismatch");
    for (const auto& row : J)
      if (row.size() != n) throw UsageError("newton_solve: jacobian size mismatch");
    Vec<S> dx = detail::lu_solve<S>(J, r);
    if (!all_finite(dx))
      throw SolveError("newton_solve: singular or non-finite Jacobian system",
                       detail::vec_norm2(r));

    // Backtracking damping: halve the step while the residual norm fails to
    // decrease; accept the last candidate when halving is exhausted.
    const double rnorm = detail::vec_norm2(r);
    double lambda = 1.0;
    Vec<S> x_new(n), r_new;
    for (int bt = 0;; ++bt) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] - S(lambda) * dx[i];
      r_new = residual(x_new);
      if (r_new.size() != n) throw UsageError("newton_solve: residual changed size");
      if (all_finite(r_new) && detail::vec_norm2(r_new) < rnorm) break;
      if (bt >= opts.max_backtracks) break;
      lambda *= 0.5;
    }
    x = std::move(x_new);
    r = std::move(r_new);
    if (!all_finite(r))
      throw SolveError("newton_solve: residual became non-finite",
                       detail::vec_norm2(r));
    rfit = wrms_norm(r, x, stop);
    if (rfit <= 1.0) return {std::move(x), it, rfit};
  }
  throw SolveError("newton_solve: no convergence in " +
                       std::to_string(opts.max_iter) + " iterations",
                   detail::vec_norm2(r));
}

}  // namespace opsplit
