#pragma once

// Scalar-field abstraction, flat state vectors, the N-additive problem type,
// and the error norms shared by every solver.
//
// The whole library is templated on the scalar type S, which is either
// double or std::complex<double>. A real-valued problem instantiated over
// the complex field runs unchanged (imaginary parts stay at round-off).

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace opsplit {

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  using real = double;
  static constexpr bool is_complex = false;
};

template <class R>
struct scalar_traits<std::complex<R>> {
  using real = R;
  static constexpr bool is_complex = true;
};

template <class S>
using real_t = typename scalar_traits<S>::real;

template <class S>
inline constexpr bool is_complex_v = scalar_traits<S>::is_complex;

template <class S>
using Vec = std::vector<S>;

// |x| as a nonnegative real; modulus in the complex field.
template <class S>
real_t<S> magnitude(const S& x) {
  return std::abs(x);
}

inline double real_part(double x) { return x; }
template <class R>
R real_part(const std::complex<R>& x) {
  return x.real();
}

// ---- element-wise vector helpers (y and x must have equal lengths) ----

template <class S>
void axpy(const S& a, const Vec<S>& x, Vec<S>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

template <class S>
Vec<S> scaled(const S& a, const Vec<S>& x) {
  Vec<S> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i];
  return r;
}

template <class S>
Vec<S> vsum(const Vec<S>& x, const Vec<S>& y) {
  Vec<S> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
  return r;
}

template <class S>
Vec<S> vdiff(const Vec<S>& x, const Vec<S>& y) {
  Vec<S> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

template <class S>
bool all_finite(const Vec<S>& x) {
  for (const S& v : x)
    if (!std::isfinite(magnitude(v))) return false;
  return true;
}

// Thrown for contract violations (shape mismatches, unknown names, bad
// arguments); maps to the CLI's usage exit code.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a solver fails (Newton non-convergence, step-size underflow,
// non-finite states); carries whatever context the thrower knows.
struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& msg, double residual = -1.0)
      : std::runtime_error(msg), last_residual(residual) {}
  // WRMS of the last residual for Newton failures; negative if not applicable.
  double last_residual;
};

struct Tolerance {
  double atol = 0.0;
  double rtol = 0.0;
};

template <class S>
using Operator = std::function<Vec<S>(S, const Vec<S>&)>;

// Jacobian of an operator, returned dense and row-major: J[i][j] = dF_i/dy_j.
template <class S>
using Jacobian = std::function<std::vector<Vec<S>>(S, const Vec<S>&)>;

// Right-hand side F(t,y) = sum of N operators on a flat length-n state.
template <class S>
struct AdditiveProblem {
  std::vector<Operator<S>> operators;
  Vec<S> y0;
  // Optional analytic Jacobians, parallel to operators; an empty list or a
  // null entry means the stage solver falls back to finite differences.
  std::vector<Jacobian<S>> jacobians;

  std::size_t dim() const { return y0.size(); }
  std::size_t n_operators() const { return operators.size(); }

  const Jacobian<S>* jacobian(std::size_t ell) const {
    if (ell < jacobians.size() && jacobians[ell]) return &jacobians[ell];
    return nullptr;
  }

  // F(t,y) summed over operators.
  Vec<S> full_rhs(S t, const Vec<S>& y) const {
    Vec<S> r(y.size(), S(0));
    for (const auto& op : operators) axpy(S(1), op(t, y), r);
    return r;
  }

  void validate() const {
    if (operators.empty()) throw UsageError("AdditiveProblem: need at least one operator");
    if (y0.empty()) throw UsageError("AdditiveProblem: empty initial state");
  }
};

// Solution samples at macro step boundaries; t holds the real time axis.
template <class S>
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec<S>> y;

  std::size_t size() const { return t.size(); }
  const Vec<S>& back() const { return y.back(); }
};

// sqrt( (1/n) sum_i ( |err_i| / (atol + rtol*|y_ref,i|) )^2 )
template <class S>
real_t<S> wrms_norm(const Vec<S>& err, const Vec<S>& y_ref, const Tolerance& tol) {
  if (err.size() != y_ref.size() || err.empty())
    throw UsageError("wrms_norm: length mismatch");
  real_t<S> acc = 0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    real_t<S> w = magnitude(err[i]) / (tol.atol + tol.rtol * magnitude(y_ref[i]));
    acc += w * w;
  }
  return std::sqrt(acc / static_cast<real_t<S>>(err.size()));
}

// Relative-absolute blend pooled over all components of all time points:
// sqrt( (1/n_t) sum ( |u - u_ref| / (1 + |u_ref|) )^2 ), n_t = total scalar count.
template <class S>
real_t<S> mrms_error(const std::vector<Vec<S>>& traj, const std::vector<Vec<S>>& ref) {
  if (traj.size() != ref.size() || traj.empty())
    throw UsageError("mrms_error: shape mismatch");
  real_t<S> acc = 0;
  std::size_t n_t = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (traj[k].size() != ref[k].size() || traj[k].empty())
      throw UsageError("mrms_error: shape mismatch");
    for (std::size_t i = 0; i < traj[k].size(); ++i) {
      real_t<S> w = magnitude(traj[k][i] - ref[k][i]) / (1 + magnitude(ref[k][i]));
      acc += w * w;
      ++n_t;
    }
  }
  return std::sqrt(acc / static_cast<real_t<S>>(n_t));
}

template <class S>
real_t<S> l2_error(const Vec<S>& y, const Vec<S>& y_ref) {
  if (y.size() != y_ref.size()) throw UsageError("l2_error: length mismatch");
  real_t<S> acc = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    real_t<S> d = magnitude(y[i] - y_ref[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace opsplit
