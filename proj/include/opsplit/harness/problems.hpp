#pragma once

// Finite-difference model problems, each exposed as an additive split of a
// single right-hand side. The splits of one model share the same flat state
// layout, so their operator sums agree componentwise and a reference computed
// from one split serves them all.

#include <opsplit/core.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace opsplit::harness {

// ---------------------------------------------------------------------------
// Square advection-diffusion-reaction model on [0,1]^2 with reflecting
// (zero-normal-derivative) boundaries. State: nodal values, row-major with x
// fastest, (nx+1)^2 nodes. The advection coefficient is applied with the
// model's own sign convention: alpha = -10 makes the transport term
// +10*(u_x + u_y).
// ---------------------------------------------------------------------------

struct Adr2dParams {
  int nx = 40;             // grid intervals per dimension
  double alpha = -10.0;    // transport weight, term is -alpha*(u_x + u_y)
  double epsilon = 0.01;   // diffusion weight
  double gamma = 100.0;    // reaction weight
  double tf = 0.1;
};

namespace detail {
// ghost-node reflection index for a zero normal derivative
inline int reflect(int i, int np) {
  if (i < 0) return -i;
  if (i >= np) return 2 * np - 2 - i;
  return i;
}
}  // namespace detail

template <class S>
Vec<S> adr2d_initial_state(const Adr2dParams& prm) {
  const int np = prm.nx + 1;
  const double h = 1.0 / prm.nx;
  Vec<S> u0(static_cast<std::size_t>(np) * np);
  for (int iy = 0; iy < np; ++iy)
    for (int ix = 0; ix < np; ++ix) {
      const double x = ix * h, y = iy * h;
      const double w = x * y * (1.0 - x) * (1.0 - y);
      u0[static_cast<std::size_t>(iy) * np + ix] = S(256.0 * w * w + 0.3);
    }
  return u0;
}

// n_split = 3: {transport, diffusion, reaction};
// n_split = 4: {transport, x-diffusion, y-diffusion, reaction}.
template <class S>
AdditiveProblem<S> build_adr2d(const Adr2dParams& prm, int n_split) {
  if (n_split != 3 && n_split != 4)
    throw UsageError("build_adr2d: n_split must be 3 or 4");
  if (prm.nx < 2) throw UsageError("build_adr2d: need nx >= 2");
  const int np = prm.nx + 1;
  const double h = 1.0 / prm.nx;
  const std::size_t n = static_cast<std::size_t>(np) * np;
  auto at = [np](const Vec<S>& u, int ix, int iy) -> const S& {
    return u[static_cast<std::size_t>(iy) * np + ix];
  };

  Operator<S> transport = [np, h, n, at, a = prm.alpha](S, const Vec<S>& u) {
    Vec<S> out(n);
    const double s = -a / (2.0 * h);
    for (int iy = 0; iy < np; ++iy)
      for (int ix = 0; ix < np; ++ix) {
        const S ux = at(u, detail::reflect(ix + 1, np), iy) -
                     at(u, detail::reflect(ix - 1, np), iy);
        const S uy = at(u, ix, detail::reflect(iy + 1, np)) -
                     at(u, ix, detail::reflect(iy - 1, np));
        out[static_cast<std::size_t>(iy) * np + ix] = S(s) * (ux + uy);
      }
    return out;
  };
  auto second_difference = [np, h, n, at](bool in_x, double eps) {
    return Operator<S>([np, h, n, at, in_x, eps](S, const Vec<S>& u) {
      Vec<S> out(n);
      const double s = eps / (h * h);
      for (int iy = 0; iy < np; ++iy)
        for (int ix = 0; ix < np; ++ix) {
          const S c = at(u, ix, iy);
          S d;
          if (in_x)
            d = at(u, detail::reflect(ix + 1, np), iy) - S(2) * c +
                at(u, detail::reflect(ix - 1, np), iy);
          else
            d = at(u, ix, detail::reflect(iy + 1, np)) - S(2) * c +
                at(u, ix, detail::reflect(iy - 1, np));
          out[static_cast<std::size_t>(iy) * np + ix] = S(s) * d;
        }
      return out;
    });
  };
  Operator<S> diffusion = [np, h, n, at, eps = prm.epsilon](S, const Vec<S>& u) {
    Vec<S> out(n);
    const double s = eps / (h * h);
    for (int iy = 0; iy < np; ++iy)
      for (int ix = 0; ix < np; ++ix) {
        const S c = at(u, ix, iy);
        const S dx = at(u, detail::reflect(ix + 1, np), iy) - S(2) * c +
                     at(u, detail::reflect(ix - 1, np), iy);
        const S dy = at(u, ix, detail::reflect(iy + 1, np)) - S(2) * c +
                     at(u, ix, detail::reflect(iy - 1, np));
        out[static_cast<std::size_t>(iy) * np + ix] = S(s) * (dx + dy);
      }
    return out;
  };
  Operator<S> reaction = [n, g = prm.gamma](S, const Vec<S>& u) {
    Vec<S> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = S(g) * u[i] * (u[i] - S(0.5)) * (S(1) - u[i]);
    return out;
  };

  AdditiveProblem<S> p;
  if (n_split == 3)
    p.operators = {std::move(transport), std::move(diffusion), std::move(reaction)};
  else
    p.operators = {std::move(transport), second_difference(true, prm.epsilon),
                   second_difference(false, prm.epsilon), std::move(reaction)};
  p.y0 = adr2d_initial_state<S>(prm);
  return p;
}

// ---------------------------------------------------------------------------
// Weakly damped cubic oscillator u' = iu + 0.1u - 0.1u^3, u(0) = 0.1, as a
// scalar complex state (dimension 1) and, equivalently, as the real pair
// u = x + iy (dimension 2). The three operators correspond term by term.
// ---------------------------------------------------------------------------

template <class S = std::complex<double>>
AdditiveProblem<S> build_oscillator_complex() {
  static_assert(is_complex_v<S>, "the scalar form needs the complex field");
  AdditiveProblem<S> p;
  p.operators = {[](S, const Vec<S>& u) { return Vec<S>{S(0, 1) * u[0]}; },
                 [](S, const Vec<S>& u) { return Vec<S>{S(0.1) * u[0]}; },
                 [](S, const Vec<S>& u) { return Vec<S>{S(-0.1) * u[0] * u[0] * u[0]}; }};
  p.y0 = {S(0.1)};
  return p;
}

// The paired form runs over either field; complex coefficients in a splitting
// scheme complexify the pair without changing the underlying model.
template <class S = double>
AdditiveProblem<S> build_oscillator_real() {
  AdditiveProblem<S> p;
  p.operators = {[](S, const Vec<S>& s) {
                   return Vec<S>{-s[1], s[0]};
                 },
                 [](S, const Vec<S>& s) {
                   return Vec<S>{S(0.1) * s[0], S(0.1) * s[1]};
                 },
                 [](S, const Vec<S>& s) {
                   const S x = s[0], y = s[1];
                   return Vec<S>{S(0.3) * x * y * y - S(0.1) * x * x * x,
                                 S(-0.3) * x * x * y + S(0.1) * y * y * y};
                 }};
  p.y0 = {S(0.1), S(0)};
  return p;
}

inline Vec<double> complex_to_pair(const Vec<std::complex<double>>& u) {
  Vec<double> out;
  out.reserve(2 * u.size());
  for (const auto& v : u) {
    out.push_back(v.real());
    out.push_back(v.imag());
  }
  return out;
}

inline Vec<std::complex<double>> embed_complex(const Vec<double>& u) {
  Vec<std::complex<double>> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i];
  return out;
}

// ---------------------------------------------------------------------------
// Stiff three-species reactor line model on [0,1]: fields (u, v, w) on
// nx nodes, interleaved (u_i, v_i, w_i), central differences, and pinned
// (zero-rate) end nodes: every operator returns zero at both boundary nodes,
// so the summed right-hand side holds them stationary.
//
// Splits:
//   SlowFast       {transport+diffusion, reaction}        (slow implicit, fast)
//   StiffImex      {diffusion, transport, reaction}       (implicit, explicit, fast)
//   PairImex       {transport, diffusion+reaction}        (explicit, implicit)
// ---------------------------------------------------------------------------

enum class BrusselatorSplit { SlowFast, StiffImex, PairImex };

struct BrusselatorParams {
  int nx = 201;       // nodes, including both ends
  double alpha = 1e-2;
  double rho = 1e-3;
  double a = 0.6;
  double b = 2.0;
  double eps = 1e-3;
  double tf = 3.0;
};

inline Vec<double> brusselator_initial_state(const BrusselatorParams& prm) {
  const double dx = 1.0 / (prm.nx - 1);
  Vec<double> y0(3 * static_cast<std::size_t>(prm.nx));
  for (int i = 0; i < prm.nx; ++i) {
    const double bump = 0.1 * std::sin(std::numbers::pi * i * dx);
    y0[3 * static_cast<std::size_t>(i) + 0] = prm.a + bump;
    y0[3 * static_cast<std::size_t>(i) + 1] = prm.b / prm.a + bump;
    y0[3 * static_cast<std::size_t>(i) + 2] = prm.b + bump;
  }
  return y0;
}

namespace detail {

// first/second central differences applied fieldwise; interior nodes only
inline Operator<double> brusselator_stencil(const BrusselatorParams& prm,
                                            double rho, double alpha) {
  const int nx = prm.nx;
  const double dx = 1.0 / (nx - 1);
  const double c1 = rho / (2.0 * dx), c2 = alpha / (dx * dx);
  return [nx, c1, c2](double, const Vec<double>& y) {
    Vec<double> out(y.size(), 0.0);
    for (int i = 1; i + 1 < nx; ++i)
      for (int f = 0; f < 3; ++f) {
        const std::size_t k = 3 * static_cast<std::size_t>(i) + f;
        const double lo = y[k - 3], mid = y[k], hi = y[k + 3];
        out[k] = c1 * (hi - lo) + c2 * (hi - 2.0 * mid + lo);
      }
    return out;
  };
}

inline Operator<double> brusselator_reaction(const BrusselatorParams& prm) {
  const int nx = prm.nx;
  const double a = prm.a, b = prm.b, eps = prm.eps;
  return [nx, a, b, eps](double, const Vec<double>& y) {
    Vec<double> out(y.size(), 0.0);
    for (int i = 1; i + 1 < nx; ++i) {
      const std::size_t k = 3 * static_cast<std::size_t>(i);
      const double u = y[k], v = y[k + 1], w = y[k + 2];
      out[k] = a - (w + 1.0) * u + u * u * v;
      out[k + 1] = w * u - u * u * v;
      out[k + 2] = (b - w) / eps - w * u;
    }
    return out;
  };
}

// constant tridiagonal-by-field stencil matrix, shared across calls
inline std::shared_ptr<const std::vector<Vec<double>>> brusselator_stencil_matrix(
    const BrusselatorParams& prm, double rho, double alpha) {
  const int nx = prm.nx;
  const double dx = 1.0 / (nx - 1);
  const double c1 = rho / (2.0 * dx), c2 = alpha / (dx * dx);
  const std::size_t n = 3 * static_cast<std::size_t>(nx);
  std::vector<Vec<double>> J(n, Vec<double>(n, 0.0));
  for (int i = 1; i + 1 < nx; ++i)
    for (int f = 0; f < 3; ++f) {
      const std::size_t k = 3 * static_cast<std::size_t>(i) + f;
      J[k][k - 3] = -c1 + c2;
      J[k][k] = -2.0 * c2;
      J[k][k + 3] = c1 + c2;
    }
  return std::make_shared<const std::vector<Vec<double>>>(std::move(J));
}

inline void add_reaction_jacobian(const BrusselatorParams& prm,
                                  const Vec<double>& y,
                                  std::vector<Vec<double>>& J) {
  const int nx = prm.nx;
  for (int i = 1; i + 1 < nx; ++i) {
    const std::size_t k = 3 * static_cast<std::size_t>(i);
    const double u = y[k], v = y[k + 1], w = y[k + 2];
    J[k][k] += -(w + 1.0) + 2.0 * u * v;
    J[k][k + 1] += u * u;
    J[k][k + 2] += -u;
    J[k + 1][k] += w - 2.0 * u * v;
    J[k + 1][k + 1] += -u * u;
    J[k + 1][k + 2] += u;
    J[k + 2][k] += -w;
    J[k + 2][k + 2] += -1.0 / prm.eps - u;
  }
}

}  // namespace detail

inline AdditiveProblem<double> build_brusselator(const BrusselatorParams& prm,
                                                BrusselatorSplit split) {
  if (prm.nx < 3) throw UsageError("build_brusselator: need nx >= 3");
  AdditiveProblem<double> p;
  p.y0 = brusselator_initial_state(prm);
  switch (split) {
    case BrusselatorSplit::SlowFast: {
      p.operators = {detail::brusselator_stencil(prm, prm.rho, prm.alpha),
                     detail::brusselator_reaction(prm)};
      auto Jslow = detail::brusselator_stencil_matrix(prm, prm.rho, prm.alpha);
      p.jacobians = {[Jslow](double, const Vec<double>&) { return *Jslow; },
                     nullptr};
      break;
    }
    case BrusselatorSplit::StiffImex: {
      p.operators = {detail::brusselator_stencil(prm, 0.0, prm.alpha),
                     detail::brusselator_stencil(prm, prm.rho, 0.0),
                     detail::brusselator_reaction(prm)};
      auto Jdiff = detail::brusselator_stencil_matrix(prm, 0.0, prm.alpha);
      p.jacobians = {[Jdiff](double, const Vec<double>&) { return *Jdiff; },
                     nullptr, nullptr};
      break;
    }
    case BrusselatorSplit::PairImex: {
      p.operators = {detail::brusselator_stencil(prm, prm.rho, 0.0),
                     [base = detail::brusselator_stencil(prm, 0.0, prm.alpha),
                      react = detail::brusselator_reaction(prm)](
                         double t, const Vec<double>& y) {
                       Vec<double> out = base(t, y);
                       Vec<double> r = react(t, y);
                       for (std::size_t i = 0; i < out.size(); ++i) out[i] += r[i];
                       return out;
                     }};
      auto Jdiff = detail::brusselator_stencil_matrix(prm, 0.0, prm.alpha);
      p.jacobians = {nullptr, [Jdiff, prm](double, const Vec<double>& y) {
                       std::vector<Vec<double>> J = *Jdiff;
                       detail::add_reaction_jacobian(prm, y, J);
                       return J;
                     }};
      break;
    }
  }
  return p;
}

}  // namespace opsplit::harness
