#pragma once

// Generalized-structure additive Runge--Kutta methods: per-operator stage
// counts with full coupling blocks A^{q,l}. Execution reduces to the additive
// single-stage-count form by placing the per-operator stages side by side.

#include <opsplit/ark.hpp>
#include <opsplit/core.hpp>
#include <opsplit/tableau.hpp>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace opsplit {

template <class S>
using Matrix = std::vector<Vec<S>>;

template <class S>
struct GarkMethod {
  // blocks[q][l] is the s_q x s_l coupling of operator q's stages to
  // operator l's stage derivatives; weights[l] has length s_l.
  std::vector<std::vector<Matrix<S>>> blocks;
  std::vector<Vec<S>> weights;
  int order = 1;
  std::string name;

  GarkMethod() = default;

  GarkMethod(std::vector<std::vector<Matrix<S>>> blocks_,
             std::vector<Vec<S>> weights_, int order_, std::string name_)
      : blocks(std::move(blocks_)),
        weights(std::move(weights_)),
        order(order_),
        name(std::move(name_)) {
    const std::size_t N = weights.size();
    if (N == 0) throw UsageError("GarkMethod: need at least one operator");
    if (blocks.size() != N)
      throw UsageError("GarkMethod '" + name + "': need N x N coupling blocks");
    for (const auto& row : blocks)
      if (row.size() != N)
        throw UsageError("GarkMethod '" + name + "': need N x N coupling blocks");
    for (std::size_t q = 0; q < N; ++q)
      for (std::size_t l = 0; l < N; ++l) {
        const Matrix<S>& B = blocks[q][l];
        if (B.size() != stage_count(q))
          throw UsageError("GarkMethod '" + name + "': block row count mismatch");
        for (const auto& r : B)
          if (r.size() != stage_count(l))
            throw UsageError("GarkMethod '" + name + "': block column count mismatch");
      }
    if (order < 1) throw UsageError("GarkMethod: order must be positive");
  }

  std::size_t n_operators() const { return weights.size(); }
  std::size_t stage_count(std::size_t q) const { return weights[q].size(); }
  std::size_t total_stages() const {
    std::size_t acc = 0;
    for (const auto& w : weights) acc += w.size();
    return acc;
  }
};

// Abscissae of block (q,l): the row sums of A^{q,l}. Always recomputed from
// the coupling block, never stored.
template <class S>
Vec<S> gark_c(const GarkMethod<S>& m, std::size_t q, std::size_t l) {
  const Matrix<S>& B = m.blocks[q][l];
  Vec<S> c(B.size(), S(0));
  for (std::size_t i = 0; i < B.size(); ++i)
    for (const S& a : B[i]) c[i] += a;
  return c;
}

// Equivalent additive method over sum_l s_l stages, operator-major: stage i
// of operator block q becomes global stage (offset_q + i). Operator l's
// tableau has nonzero columns only at block l's stages, so each operator is
// evaluated exactly at its own stages and at its diagonal-block abscissae.
template <class S>
ArkMethod<S> gark_to_ark(const GarkMethod<S>& m) {
  const std::size_t N = m.n_operators();
  const std::size_t S_total = m.total_stages();
  std::vector<std::size_t> offset(N, 0);
  for (std::size_t l = 1; l < N; ++l)
    offset[l] = offset[l - 1] + m.stage_count(l - 1);

  std::vector<ButcherTableau<S>> tabs;
  tabs.reserve(N);
  for (std::size_t ell = 0; ell < N; ++ell) {
    std::vector<Vec<S>> A(S_total, Vec<S>(S_total, S(0)));
    Vec<S> b(S_total, S(0));
    for (std::size_t q = 0; q < N; ++q)
      for (std::size_t i = 0; i < m.stage_count(q); ++i)
        for (std::size_t j = 0; j < m.stage_count(ell); ++j)
          A[offset[q] + i][offset[ell] + j] = m.blocks[q][ell][i][j];
    for (std::size_t j = 0; j < m.stage_count(ell); ++j)
      b[offset[ell] + j] = m.weights[ell][j];
    tabs.emplace_back(std::move(A), std::move(b), m.order);
  }
  return ArkMethod<S>(std::move(tabs), m.order, m.name);
}

template <class S>
Vec<S> gark_step(const AdditiveProblem<S>& problem, const GarkMethod<S>& m, S t,
                 const Vec<S>& y, S h, const NewtonOptions& nopts = {}) {
  return ark_step<S>(problem, gark_to_ark(m), t, y, h, nopts);
}

template <class S>
Trajectory<S> gark_solve(const AdditiveProblem<S>& problem, const GarkMethod<S>& m,
                         double t0, double tf, double dt,
                         const NewtonOptions& nopts = {}) {
  return ark_solve<S>(problem, gark_to_ark(m), t0, tf, dt, nopts);
}

}  // namespace opsplit
