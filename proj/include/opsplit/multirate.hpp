#pragma once

// Multirate two-operator methods: the fast operator takes M micro-steps per
// macro step, coupled to the slow stages through step-dependent blocks. A
// method expands, for fixed M, into a two-block generalized additive tableau
// (fast block first); solving goes through a sequential per-stage executor
// that is independent of the additive-method step, so the two paths
// cross-check each other.

#include <opsplit/core.hpp>
#include <opsplit/gark.hpp>
#include <opsplit/newton.hpp>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace opsplit {

template <class S>
using CouplingFn = std::function<Matrix<S>(std::size_t m, std::size_t M)>;

template <class S>
struct MrGarkMethod {
  Matrix<S> A_FF, A_SS;
  Vec<S> b_F, b_S;
  CouplingFn<S> A_FS;  // slow derivatives entering micro-step m of M
  CouplingFn<S> A_SF;  // fast derivatives entering the slow stages
  int order = 1;
  std::string name;

  std::size_t fast_stages() const { return b_F.size(); }
  std::size_t slow_stages() const { return b_S.size(); }

  void validate() const {
    if (b_F.empty() || b_S.empty())
      throw UsageError("MrGarkMethod '" + name + "': empty stage vectors");
    if (A_FF.size() != b_F.size() || A_SS.size() != b_S.size())
      throw UsageError("MrGarkMethod '" + name + "': base tableau shape mismatch");
    for (const auto& r : A_FF)
      if (r.size() != b_F.size())
        throw UsageError("MrGarkMethod '" + name + "': A_FF not square");
    for (const auto& r : A_SS)
      if (r.size() != b_S.size())
        throw UsageError("MrGarkMethod '" + name + "': A_SS not square");
    if (!A_FS || !A_SF)
      throw UsageError("MrGarkMethod '" + name + "': missing coupling blocks");
  }
};

// The fixed-M expansion over operators (fast, slow). Fast micro-step m
// occupies stage rows (m-1)*sF .. m*sF-1 of the fast block: its own tableau
// scaled by 1/M on the diagonal, completed micro-steps entering through
// 1/M * ones*b_F^T, and the slow coupling taken verbatim from A_FS(m, M).
// Slow rows collect every micro-step's fast derivatives through
// 1/M * A_SF(m, M). Fast weights repeat b_F/M across micro-steps.
template <class S>
GarkMethod<S> expand_multirate(const MrGarkMethod<S>& m, std::size_t M) {
  m.validate();
  if (M < 1) throw UsageError("expand_multirate: M must be at least 1");
  const std::size_t sF = m.fast_stages(), sS = m.slow_stages();
  const S invM = S(1) / S(double(M));

  Matrix<S> FF(M * sF, Vec<S>(M * sF, S(0)));
  Matrix<S> FS(M * sF, Vec<S>(sS, S(0)));
  Matrix<S> SF(sS, Vec<S>(M * sF, S(0)));
  for (std::size_t mu = 1; mu <= M; ++mu) {
    const std::size_t row0 = (mu - 1) * sF;
    Matrix<S> cFS = m.A_FS(mu, M);
    if (cFS.size() != sF)
      throw UsageError("expand_multirate: A_FS(" + std::to_string(mu) +
                       ") row count mismatch");
    for (std::size_t i = 0; i < sF; ++i) {
      if (cFS[i].size() != sS)
        throw UsageError("expand_multirate: A_FS(" + std::to_string(mu) +
                         ") column count mismatch");
      for (std::size_t j = 0; j < sS; ++j) FS[row0 + i][j] = cFS[i][j];
      for (std::size_t j = 0; j < sF; ++j)
        FF[row0 + i][row0 + j] = invM * m.A_FF[i][j];
      for (std::size_t lam = 1; lam < mu; ++lam)
        for (std::size_t j = 0; j < sF; ++j)
          FF[row0 + i][(lam - 1) * sF + j] = invM * m.b_F[j];
    }
    Matrix<S> cSF = m.A_SF(mu, M);
    if (cSF.size() != sS)
      throw UsageError("expand_multirate: A_SF(" + std::to_string(mu) +
                       ") row count mismatch");
    for (std::size_t i = 0; i < sS; ++i) {
      if (cSF[i].size() != sF)
        throw UsageError("expand_multirate: A_SF(" + std::to_string(mu) +
                         ") column count mismatch");
      for (std::size_t j = 0; j < sF; ++j)
        SF[i][(mu - 1) * sF + j] = invM * cSF[i][j];
    }
  }
  Vec<S> bF(M * sF);
  for (std::size_t mu = 0; mu < M; ++mu)
    for (std::size_t j = 0; j < sF; ++j) bF[mu * sF + j] = invM * m.b_F[j];

  return GarkMethod<S>({{FF, FS}, {SF, m.A_SS}}, {bF, m.b_S}, m.order,
                       m.name + "(M=" + std::to_string(M) + ")");
}

// One step of a generalized additive method executed stage by stage: stages
// are ordered by readiness (smallest global index first among ready ones),
// allowing each stage at most a dependence on itself, which is resolved with
// a Newton solve on the diagonal coefficient. Mutually coupled stage groups
// are rejected by name.
template <class S>
Vec<S> gark_step_sequential(const AdditiveProblem<S>& problem,
                            const GarkMethod<S>& m, S t, const Vec<S>& y, S h,
                            const NewtonOptions& nopts = {}) {
  const std::size_t N = m.n_operators();
  if (problem.n_operators() != N)
    throw UsageError("gark_step_sequential: operator count mismatch");
  const std::size_t n = y.size();
  std::vector<std::size_t> offset(N, 0);
  for (std::size_t l = 1; l < N; ++l)
    offset[l] = offset[l - 1] + m.stage_count(l - 1);
  const std::size_t total = m.total_stages();
  auto block_of = [&](std::size_t g) {
    std::size_t q = N - 1;
    while (offset[q] > g) --q;
    return q;
  };

  // K indexed by global stage (each stage holds its own block's derivative).
  std::vector<Vec<S>> K(total);

  // needed[g]: does any row or weight reference stage g's derivative?
  std::vector<bool> needed(total, false);
  for (std::size_t g = 0; g < total; ++g) {
    const std::size_t l = block_of(g), j = g - offset[l];
    if (m.weights[l][j] != S(0)) needed[g] = true;
    for (std::size_t q = 0; q < N && !needed[g]; ++q)
      for (std::size_t i = 0; i < m.stage_count(q); ++i)
        if (m.blocks[q][l][i][j] != S(0)) {
          needed[g] = true;
          break;
        }
  }

  std::vector<std::vector<std::size_t>> deps(total);
  for (std::size_t g = 0; g < total; ++g) {
    const std::size_t q = block_of(g), i = g - offset[q];
    for (std::size_t l = 0; l < N; ++l)
      for (std::size_t j = 0; j < m.stage_count(l); ++j)
        if (m.blocks[q][l][i][j] != S(0) && offset[l] + j != g)
          deps[g].push_back(offset[l] + j);
  }

  std::vector<bool> done(total, false);
  std::size_t remaining = total;
  while (remaining > 0) {
    std::size_t pick = total;
    for (std::size_t g = 0; g < total && pick == total; ++g) {
      if (done[g]) continue;
      bool ready = true;
      for (std::size_t d : deps[g])
        if (!done[d]) ready = false;
      if (ready) pick = g;
    }
    if (pick == total) {
      std::string cyc;
      for (std::size_t g = 0; g < total; ++g)
        if (!done[g]) cyc += (cyc.empty() ? "" : ", ") + std::to_string(g + 1);
      throw UsageError("gark_step_sequential: method '" + m.name +
                       "' couples stages {" + cyc + "} in a cycle");
    }
    const std::size_t q = block_of(pick), i = pick - offset[q];
    Vec<S> known = y;
    for (std::size_t l = 0; l < N; ++l)
      for (std::size_t j = 0; j < m.stage_count(l); ++j) {
        const S a = m.blocks[q][l][i][j];
        if (a == S(0) || offset[l] + j == pick) continue;
        axpy(h * a, K[offset[l] + j], known);
      }
    S ci(0);
    for (const S& a : m.blocks[q][q][i]) ci += a;
    const S ti = t + ci * h;
    const S aii = m.blocks[q][q][i][i];
    Vec<S> Yi;
    if (aii == S(0)) {
      Yi = std::move(known);
    } else {
      ResidualFn<S> res = [&](const Vec<S>& x) {
        Vec<S> r = problem.operators[q](ti, x);
        for (std::size_t p = 0; p < n; ++p)
          r[p] = x[p] - known[p] - h * aii * r[p];
        return r;
      };
      ResidualJacFn<S> rjac;
      if (const Jacobian<S>* J = problem.jacobian(q)) {
        rjac = [&, J](const Vec<S>& x) {
          auto Jf = (*J)(ti, x);
          for (std::size_t p = 0; p < n; ++p)
            for (std::size_t c2 = 0; c2 < n; ++c2) {
              Jf[p][c2] = -h * aii * Jf[p][c2];
              if (p == c2) Jf[p][c2] += S(1);
            }
          return Jf;
        };
      }
      Yi = newton_solve<S>(res, y, nopts, rjac).x;
    }
    if (needed[pick]) {
      K[pick] = problem.operators[q](ti, Yi);
      if (K[pick].size() != n)
        throw UsageError("gark_step_sequential: operator size mismatch");
    }
    done[pick] = true;
    --remaining;
  }

  Vec<S> out = y;
  for (std::size_t l = 0; l < N; ++l)
    for (std::size_t j = 0; j < m.stage_count(l); ++j)
      if (m.weights[l][j] != S(0)) axpy(h * m.weights[l][j], K[offset[l] + j], out);
  return out;
}

// One macro step. The problem's operators are ordered (slow, fast); the
// expanded tableau puts the fast block first, so they swap places here.
template <class S>
Vec<S> multirate_step(const AdditiveProblem<S>& problem, const MrGarkMethod<S>& m,
                      std::size_t M, S t, const Vec<S>& y, S h,
                      const NewtonOptions& nopts = {}) {
  if (problem.n_operators() != 2)
    throw UsageError("multirate_step: need exactly (slow, fast) operators");
  AdditiveProblem<S> swapped;
  swapped.operators = {problem.operators[1], problem.operators[0]};
  swapped.y0 = problem.y0;
  if (!problem.jacobians.empty()) {
    swapped.jacobians.resize(2);
    if (problem.jacobians.size() > 1) swapped.jacobians[0] = problem.jacobians[1];
    swapped.jacobians[1] = problem.jacobians[0];
  }
  return gark_step_sequential<S>(swapped, expand_multirate(m, M), t, y, h, nopts);
}

template <class S>
Trajectory<S> multirate_solve(const AdditiveProblem<S>& problem,
                              const MrGarkMethod<S>& m, std::size_t M, double t0,
                              double tf, double dt,
                              const NewtonOptions& nopts = {}) {
  problem.validate();
  if (!(dt > 0) || !(tf > t0))
    throw UsageError("multirate_solve: need tf > t0 and dt > 0");
  const GarkMethod<S> expanded = expand_multirate(m, M);
  AdditiveProblem<S> swapped;
  swapped.operators = {problem.operators[1], problem.operators[0]};
  swapped.y0 = problem.y0;
  if (!problem.jacobians.empty()) {
    swapped.jacobians.resize(2);
    if (problem.jacobians.size() > 1) swapped.jacobians[0] = problem.jacobians[1];
    swapped.jacobians[1] = problem.jacobians[0];
  }
  Trajectory<S> out;
  out.t.push_back(t0);
  out.y.push_back(problem.y0);
  double t = t0;
  Vec<S> y = problem.y0;
  const double tiny = 1e-12 * (tf - t0);
  while (t < tf - tiny) {
    const double h = std::min(dt, tf - t);
    y = gark_step_sequential<S>(swapped, expanded, S(t), y, S(h), nopts);
    t += h;
    if (!all_finite(y))
      throw SolveError("multirate_solve: non-finite state at t = " +
                       std::to_string(t));
    out.t.push_back(t);
    out.y.push_back(y);
  }
  return out;
}

}  // namespace opsplit
