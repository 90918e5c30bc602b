#pragma once

// Exact operator-evaluation accounting: evaluator wrappers bump a per-operator
// counter on every call. Work units weight calls by the flat state dimension so
// that scalar-complex and paired-real formulations of the same model compare
// on equal footing.

#include <opsplit/core.hpp>

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

namespace opsplit::harness {

struct EvalCounts {
  std::vector<long long> calls;

  long long total() const {
    long long acc = 0;
    for (long long c : calls) acc += c;
    return acc;
  }
};

// Returns a copy of the problem whose evaluators increment counts->calls.
// The counter object is owned by the caller; one instance per run.
template <class S>
AdditiveProblem<S> with_counting(AdditiveProblem<S> p,
                                 const std::shared_ptr<EvalCounts>& counts) {
  counts->calls.assign(p.n_operators(), 0);
  for (std::size_t ell = 0; ell < p.operators.size(); ++ell) {
    Operator<S> inner = std::move(p.operators[ell]);
    p.operators[ell] = [inner = std::move(inner), counts, ell](S t, const Vec<S>& y) {
      ++counts->calls[ell];
      return inner(t, y);
    };
  }
  return p;
}

// calls x flat state dimension: components touched per evaluation.
inline long long work_units(const EvalCounts& counts, std::size_t dim) {
  return counts.total() * static_cast<long long>(dim);
}

}  // namespace opsplit::harness
