#pragma once

// Convergence-study runner: evaluates an error functional over a decreasing
// step-size sweep (optionally with worker threads), forms pairwise observed
// orders, and fits a least-squares slope over the widest window in which the
// pairwise orders have settled. A failed run leaves a gap instead of aborting
// the sweep.

#include <opsplit/core.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace opsplit::harness {

struct ConvergenceRun {
  double dt = 0.0;
  std::optional<double> error;  // empty on solver failure
  std::string note;             // failure description when error is empty
};

struct ConvergenceReport {
  std::vector<ConvergenceRun> runs;
  // pairwise[i] relates runs[i] and runs[i+1]; empty across a gap
  std::vector<std::optional<double>> pairwise;
  std::optional<double> observed_order;
  std::size_t window_first = 0, window_last = 0;  // inclusive run indices
};

// worker-thread cap: explicit argument, else OPSPLIT_THREADS, else hardware
inline unsigned resolve_thread_cap(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("OPSPLIT_THREADS"); env && *env) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

namespace detail {

inline double lsq_loglog_slope(const std::vector<ConvergenceRun>& runs,
                               std::size_t first, std::size_t last) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = 0;
  for (std::size_t i = first; i <= last; ++i) {
    const double x = std::log(runs[i].dt), y = std::log(*runs[i].error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

// error_at(dt) must be safe to call from concurrent threads (each call should
// own its problem instance); throw SolveError to record a gap.
inline ConvergenceReport run_convergence(
    const std::vector<double>& dts, const std::function<double(double)>& error_at,
    unsigned max_threads = 0,
    std::optional<std::pair<std::size_t, std::size_t>> window_override = {}) {
  if (dts.size() < 4) throw UsageError("run_convergence: need at least 4 step sizes");
  for (std::size_t i = 1; i < dts.size(); ++i)
    if (!(dts[i] < dts[i - 1]))
      throw UsageError("run_convergence: step sizes must strictly decrease");

  ConvergenceReport rep;
  rep.runs.resize(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) rep.runs[i].dt = dts[i];

  const unsigned n_workers =
      std::min<unsigned>(resolve_thread_cap(max_threads),
                         static_cast<unsigned>(dts.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < dts.size(); i = next.fetch_add(1)) {
      try {
        rep.runs[i].error = error_at(dts[i]);
        if (!(*rep.runs[i].error > 0) || !std::isfinite(*rep.runs[i].error)) {
          rep.runs[i].error.reset();
          rep.runs[i].note = "error not positive and finite";
        }
      } catch (const std::exception& e) {
        rep.runs[i].note = e.what();  // a gap, not an abort: the sweep continues
      }
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  rep.pairwise.assign(dts.size() ? dts.size() - 1 : 0, std::nullopt);
  for (std::size_t i = 0; i + 1 < dts.size(); ++i)
    if (rep.runs[i].error && rep.runs[i + 1].error)
      rep.pairwise[i] = std::log(*rep.runs[i].error / *rep.runs[i + 1].error) /
                        std::log(dts[i] / dts[i + 1]);

  if (window_override) {
    auto [first, last] = *window_override;
    if (first >= last || last >= dts.size())
      throw UsageError("run_convergence: window must span at least two step sizes");
    for (std::size_t i = first; i <= last; ++i)
      if (!rep.runs[i].error)
        throw UsageError("run_convergence: window covers a failed run");
    rep.window_first = first;
    rep.window_last = last;
    rep.observed_order = detail::lsq_loglog_slope(rep.runs, first, last);
    return rep;
  }

  // widest contiguous block of ≥2 successful runs whose successive pairwise
  // orders differ by < 0.5; ties go to the rightmost (asymptotic) block
  std::size_t best_first = 0, best_len = 0;
  std::size_t i = 0;
  while (i < dts.size()) {
    if (!rep.runs[i].error) {
      ++i;
      continue;
    }
    std::size_t j = i;  // extend while the next run exists and orders agree
    while (j + 1 < dts.size() && rep.pairwise[j] &&
           (j == i || std::abs(*rep.pairwise[j] - *rep.pairwise[j - 1]) < 0.5))
      ++j;
    const std::size_t len = j - i + 1;
    if (len >= 2 && len >= best_len) {
      best_first = i;
      best_len = len;
    }
    i = (j == i) ? i + 1 : j;
  }
  if (best_len >= 2) {
    rep.window_first = best_first;
    rep.window_last = best_first + best_len - 1;
    rep.observed_order =
        detail::lsq_loglog_slope(rep.runs, rep.window_first, rep.window_last);
  }
  return rep;
}

}  // namespace opsplit::harness
