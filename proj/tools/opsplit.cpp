// Command-line workbench around the additive-splitting solvers: single runs,
// convergence sweeps against cached high-accuracy references, a catalog
// listing, and work-precision accounting with exact evaluation counts.
//
// Exit codes: 0 success, 1 usage error, 2 solver failure.

#include <CLI11.hpp>

#include <opsplit/ark.hpp>
#include <opsplit/catalog.hpp>
#include <opsplit/fractional.hpp>
#include <opsplit/gark.hpp>
#include <opsplit/harness/convergence.hpp>
#include <opsplit/harness/counting.hpp>
#include <opsplit/harness/csv.hpp>
#include <opsplit/harness/problems.hpp>
#include <opsplit/harness/reference.hpp>
#include <opsplit/mri.hpp>
#include <opsplit/multirate.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

using namespace opsplit;
using namespace opsplit::harness;
using Cx = std::complex<double>;

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

enum class MethodKind { Splitting, RungeKutta, Coupled, Multirate, Mri };

struct MethodRef {
  MethodKind kind;
  std::string name;  // canonical catalog spelling
};

const std::map<std::string, std::string>& rk_aliases() {
  static const std::map<std::string, std::string> m = {
      {"rk2", "Heun2"},
      {"rk3", "Kutta3"},
      {"trapezoidal", "ImplicitTrapezoidal"},
      {"itrap", "ImplicitTrapezoidal"},
  };
  return m;
}

std::optional<std::string> canonical_rk(const std::string& raw) {
  const std::string lc = lower(raw);
  for (const auto& n : rk_builtin_names())
    if (lower(n) == lc) return n;
  if (auto it = rk_aliases().find(lc); it != rk_aliases().end()) return it->second;
  return std::nullopt;
}

MethodRef resolve_method(const std::string& raw) {
  const std::string lc = lower(raw);
  for (const auto& n : splitting_names())
    if (lower(n) == lc) return {MethodKind::Splitting, n};
  if (auto rk = canonical_rk(raw)) return {MethodKind::RungeKutta, *rk};
  for (const auto& n : coupled_names())
    if (lower(n) == lc) return {MethodKind::Coupled, n};
  for (const auto& n : multirate_names())
    if (lower(n) == lc) return {MethodKind::Multirate, n};
  for (const auto& n : mri_names())
    if (lower(n) == lc) return {MethodKind::Mri, n};
  throw UsageError("unknown method '" + raw + "'; run `opsplit list-methods`");
}

struct CommonOpts {
  std::string problem;
  std::string method;
  std::string split;            // adr2d: 3|4; brusselator: s-f | i-e-f | 1-2
  std::string form = "complex"; // complex-ode: complex | real
  std::string sub;              // sub-integrator override for splitting schemes
  int substeps = 1;             // equal sub-steps per fraction span
  int nx = 0;                   // 0 keeps the problem default
  int rate_ratio = 10;          // micro-steps per macro step for two-rate methods
  double fast_rtol = 1e-10;
  double fast_atol = 1e-12;
  double newton_tol = 1e-12;
  double ref_tol = 0.0;         // 0 keeps the per-problem default
  std::string cache_dir;
};

NewtonOptions newton_opts(const CommonOpts& o) { return {o.newton_tol, 50, 1e-8, 8}; }

template <class S>
MethodMap<S> sub_methods(const CommonOpts& o, int scheme_order) {
  if (o.substeps < 1) throw UsageError("substeps must be at least 1");
  if (o.sub.empty() && o.substeps == 1)
    return default_methods_for_order<S>(scheme_order);
  std::string name;
  if (!o.sub.empty()) {
    auto rk = canonical_rk(o.sub);
    if (!rk) throw UsageError("unknown sub-integrator '" + o.sub + "'");
    name = *rk;
  } else {
    switch (scheme_order) {
      case 1: name = "FE"; break;
      case 2: name = "Heun2"; break;
      case 3: name = "Kutta3"; break;
      default: name = "RK4"; break;
    }
  }
  return MethodMap<S>::uniform(SingleRK<S>{builtin_tableau<S>(name), o.substeps});
}

template <class S>
Trajectory<S> monolithic_rk_solve(const AdditiveProblem<S>& p,
                                  const std::string& rk_name, double t0, double tf,
                                  double dt, const NewtonOptions& nopts) {
  const ButcherTableau<S> tab = builtin_tableau<S>(rk_name);
  Operator<S> rhs = [&p](S t, const Vec<S>& y) { return p.full_rhs(t, y); };
  Trajectory<S> out;
  out.t.push_back(t0);
  out.y.push_back(p.y0);
  double t = t0;
  Vec<S> y = p.y0;
  const double tiny = 1e-12 * (tf - t0);
  while (t < tf - tiny) {
    const double h = std::min(dt, tf - t);
    y = rk_step<S>(rhs, tab, S(t), y, S(h), nullptr, nopts);
    t += h;
    if (!all_finite(y))
      throw SolveError("monolithic solve: non-finite state at t = " + std::to_string(t));
    out.t.push_back(t);
    out.y.push_back(y);
  }
  return out;
}

template <class S>
std::vector<Vec<S>> pick_samples(const Trajectory<S>& traj,
                                 const std::vector<double>& ts) {
  std::vector<Vec<S>> out;
  out.reserve(ts.size());
  std::size_t k = 0;
  for (double t : ts) {
    while (k < traj.size() && traj.t[k] < t - 1e-6) ++k;
    if (k >= traj.size() || std::abs(traj.t[k] - t) > 1e-6)
      throw UsageError("step size does not land on sample time t = " + g17(t));
    out.push_back(traj.y[k]);
  }
  return out;
}

Tolerance ref_tolerance(const CommonOpts& o, double fallback) {
  const double v = o.ref_tol > 0 ? o.ref_tol : fallback;
  return {v, v};
}

// ---- per-problem drivers: solve at one dt, return error vs reference ----

Adr2dParams adr_params(const CommonOpts& o) {
  Adr2dParams prm;
  if (o.nx > 0) prm.nx = o.nx;
  return prm;
}

std::vector<Vec<double>> adr_reference(const CommonOpts& o) {
  const Adr2dParams prm = adr_params(o);
  // the reference only sees the summed right-hand side, so both split
  // variants share one cache entry keyed by the canonical 3-split build
  return reference_solution<double>(build_adr2d<double>(prm, 3),
                                    "adr2d nx=" + std::to_string(prm.nx), {prm.tf},
                                    ref_tolerance(o, 1e-12), 0.0, o.cache_dir);
}

double run_adr2d(const CommonOpts& o, double dt, const std::string& traj_out,
                 const std::shared_ptr<EvalCounts>& counts) {
  const Adr2dParams prm = adr_params(o);
  int n_split = 3;
  if (!o.split.empty()) {
    if (o.split == "3" || o.split == "4") n_split = o.split[0] - '0';
    else throw UsageError("adr2d split must be 3 or 4");
  }
  const Vec<double> ref = adr_reference(o)[0];
  const MethodRef mr = resolve_method(o.method);
  if (mr.kind == MethodKind::Splitting) {
    if (mr.name.rfind("CLT", 0) == 0) {
      auto p = build_adr2d<Cx>(prm, n_split);
      if (counts) p = with_counting(std::move(p), counts);
      auto scheme = make_splitting<Cx>(mr.name, n_split);
      auto traj = fractional_solve<Cx>(p, scheme, sub_methods<Cx>(o, scheme.order),
                                       0.0, prm.tf, dt, newton_opts(o));
      if (!traj_out.empty()) write_trajectory_csv(traj_out, traj);
      return l2_error(traj.back(), embed_complex(ref));
    }
    auto p = build_adr2d<double>(prm, n_split);
    if (counts) p = with_counting(std::move(p), counts);
    auto scheme = make_splitting<double>(mr.name, n_split);
    auto traj = fractional_solve<double>(p, scheme, sub_methods<double>(o, scheme.order),
                                         0.0, prm.tf, dt, newton_opts(o));
    if (!traj_out.empty()) write_trajectory_csv(traj_out, traj);
    return l2_error(traj.back(), ref);
  }
  if (mr.kind == MethodKind::RungeKutta) {
    auto p = build_adr2d<double>(prm, n_split);
    if (counts) p = with_counting(std::move(p), counts);
    auto traj = monolithic_rk_solve<double>(p, mr.name, 0.0, prm.tf, dt, newton_opts(o));
    if (!traj_out.empty()) write_trajectory_csv(traj_out, traj);
    return l2_error(traj.back(), ref);
  }
  throw UsageError("method '" + mr.name +
                   "' does not apply to adr2d; use a splitting scheme or a plain "
                   "Runge-Kutta method");
}

std::vector<double> oscillator_samples() {
  std::vector<double> ts;
  for (int i = 1; i <= 100; ++i) ts.push_back(i);
  return ts;
}

std::vector<Vec<Cx>> oscillator_reference_complex(const CommonOpts& o) {
  return reference_solution<Cx>(build_oscillator_complex(), "complex-ode complex",
                                oscillator_samples(), ref_tolerance(o, 1e-13), 0.0,
                                o.cache_dir);
}

std::vector<Vec<double>> oscillator_reference_real(const CommonOpts& o) {
  return reference_solution<double>(build_oscillator_real(), "complex-ode real",
                                    oscillator_samples(), ref_tolerance(o, 1e-13),
                                    0.0, o.cache_dir);
}

double run_oscillator(const CommonOpts& o, const std::string& form, double dt,
                      const std::string& traj_out,
                      const std::shared_ptr<EvalCounts>& counts) {
  if (form != "complex" && form != "real")
    throw UsageError("complex-ode form must be 'complex' or 'real'");
  const double inv = 1.0 / dt;
  if (std::abs(inv - std::round(inv)) > 1e-9 * inv)
    throw UsageError("complex-ode errors sample at whole times; dt must divide 1");
  const std::vector<double> ts = oscillator_samples();
  const MethodRef mr = resolve_method(o.method);
  const bool complex_scheme =
      mr.kind == MethodKind::Splitting && mr.name.rfind("CLT", 0) == 0;

  auto fractional_run = [&](auto problem) {
    using S = typename decltype(problem.y0)::value_type;
    if (counts) problem = with_counting(std::move(problem), counts);
    auto scheme = make_splitting<S>(mr.name, 3);
    auto traj = fractional_solve<S>(problem, scheme, sub_methods<S>(o, scheme.order),
                                    0.0, 100.0, dt, newton_opts(o));
    if (!traj_out.empty()) write_trajectory_csv(traj_out, traj);
    return pick_samples(traj, ts);
  };
  auto monolithic_run = [&](auto problem) {
    using S = typename decltype(problem.y0)::value_type;
    if (counts) problem = with_counting(std::move(problem), counts);
    auto traj = monolithic_rk_solve<S>(problem, mr.name, 0.0, 100.0, dt, newton_opts(o));
    if (!traj_out.empty()) write_trajectory_csv(traj_out, traj);
    return pick_samples(traj, ts);
  };

  if (form == "complex") {
    const auto ref = oscillator_reference_complex(o);
    if (mr.kind == MethodKind::Splitting)
      return mrms_error<Cx>(fractional_run(build_oscillator_complex()), ref);
    if (mr.kind == MethodKind::RungeKutta)
      return mrms_error<Cx>(monolithic_run(build_oscillator_complex()), ref);
  } else {
    const auto ref = oscillator_reference_real(o);
    if (complex_scheme) {
      // complex coefficients promote the paired real form to the complex field
      auto got = fractional_run(build_oscillator_real<Cx>());
      std::vector<Vec<Cx>> ref_c;
      ref_c.reserve(ref.size());
      for (const auto& r : ref) ref_c.push_back(embed_complex(r));
      return mrms_error<Cx>(got, ref_c);
    }
    if (mr.kind == MethodKind::Splitting)
      return mrms_error<double>(fractional_run(build_oscillator_real()), ref);
    if (mr.kind == MethodKind::RungeKutta)
      return mrms_error<double>(monolithic_run(build_oscillator_real()), ref);
  }
  throw UsageError("method '" + mr.name +
                   "' does not apply to complex-ode; use a splitting scheme or a "
                   "plain Runge-Kutta method");
}

BrusselatorParams brusselator_params(const CommonOpts& o) {
  BrusselatorParams prm;
  if (o.nx > 0) prm.nx = o.nx;
  return prm;
}

std::vector<Vec<double>> brusselator_reference(const CommonOpts& o) {
  const BrusselatorParams prm = brusselator_params(o);
  return reference_solution<double>(
      build_brusselator(prm, BrusselatorSplit::SlowFast),
      "brusselator nx=" + std::to_string(prm.nx), {prm.tf},
      ref_tolerance(o, 1e-12), 0.0, o.cache_dir);
}

double run_brusselator(const CommonOpts& o, double dt, const std::string& traj_out,
                       const std::shared_ptr<EvalCounts>& counts) {
  const BrusselatorParams prm = brusselator_params(o);
  const MethodRef mr = resolve_method(o.method);
  std::string split = o.split;
  if (split.empty()) {
    switch (mr.kind) {
      case MethodKind::Mri:
        split = make_mri<double>(mr.name).imex() ? "i-e-f" : "s-f";
        break;
      case MethodKind::Coupled: split = "1-2"; break;
      default: split = "s-f"; break;
    }
  }
  BrusselatorSplit bs;
  if (split == "s-f") bs = BrusselatorSplit::SlowFast;
  else if (split == "i-e-f") bs = BrusselatorSplit::StiffImex;
  else if (split == "1-2") bs = BrusselatorSplit::PairImex;
  else throw UsageError("brusselator split must be s-f, i-e-f, or 1-2");

  auto p = build_brusselator(prm, bs);
  if (counts) p = with_counting(std::move(p), counts);
  const Vec<double> ref = brusselator_reference(o)[0];
  const NewtonOptions nopts = newton_opts(o);

  Trajectory<double> traj;
  switch (mr.kind) {
    case MethodKind::Mri: {
      auto m = make_mri<double>(mr.name);
      if (m.n_operators() != p.n_operators())
        throw UsageError("method '" + mr.name + "' needs " +
                         std::to_string(m.n_operators()) +
                         " operators; split '" + split + "' provides " +
                         std::to_string(p.n_operators()));
      FastSolveConfig<double> fast;
      fast.tol = {o.fast_atol, o.fast_rtol};
      traj = mri_solve<double>(p, m, 0.0, prm.tf, dt, fast, nopts);
      break;
    }
    case MethodKind::Coupled:
      traj = gark_solve<double>(p, make_coupled<double>(mr.name), 0.0, prm.tf, dt, nopts);
      break;
    case MethodKind::Multirate: {
      if (o.rate_ratio < 1) throw UsageError("rate ratio must be at least 1");
      traj = multirate_solve<double>(p, make_multirate<double>(mr.name),
                                     static_cast<std::size_t>(o.rate_ratio), 0.0,
                                     prm.tf, dt, nopts);
      break;
    }
    case MethodKind::Splitting: {
      auto scheme = make_splitting<double>(mr.name, p.n_operators());
      traj = fractional_solve<double>(p, scheme, sub_methods<double>(o, scheme.order),
                                      0.0, prm.tf, dt, nopts);
      break;
    }
    case MethodKind::RungeKutta:
      traj = monolithic_rk_solve<double>(p, mr.name, 0.0, prm.tf, dt, nopts);
      break;
  }
  if (!traj_out.empty()) write_trajectory_csv(traj_out, traj);
  return l2_error(traj.back(), ref);
}

double run_case(const CommonOpts& o, double dt, const std::string& traj_out = "",
                const std::shared_ptr<EvalCounts>& counts = nullptr) {
  if (o.problem == "adr2d") return run_adr2d(o, dt, traj_out, counts);
  if (o.problem == "complex-ode")
    return run_oscillator(o, o.form, dt, traj_out, counts);
  if (o.problem == "brusselator") return run_brusselator(o, dt, traj_out, counts);
  throw UsageError("unknown problem '" + o.problem +
                   "'; choose adr2d, complex-ode, or brusselator");
}

void warm_reference(const CommonOpts& o) {
  if (o.problem == "adr2d") (void)adr_reference(o);
  else if (o.problem == "complex-ode") {
    if (o.form == "real") (void)oscillator_reference_real(o);
    else (void)oscillator_reference_complex(o);
  } else if (o.problem == "brusselator") (void)brusselator_reference(o);
}

// ---- subcommands ----

int cmd_solve(const CommonOpts& o, double dt, const std::string& out) {
  const double err = run_case(o, dt, out);
  std::cout << "problem=" << o.problem << " method=" << resolve_method(o.method).name
            << " dt=" << g17(dt) << " error=" << g17(err) << '\n';
  if (!out.empty()) std::cout << "trajectory written to " << out << '\n';
  return 0;
}

int cmd_converge(const CommonOpts& o, const std::vector<double>& dts,
                 const std::string& out, const std::string& fit_window,
                 unsigned threads) {
  std::optional<std::pair<std::size_t, std::size_t>> window;
  if (!fit_window.empty()) {
    std::size_t lo = 0, hi = 0;
    if (std::sscanf(fit_window.c_str(), "%zu:%zu", &lo, &hi) != 2)
      throw UsageError("--fit-window expects lo:hi indices into the dt list");
    window = {{lo, hi}};
  }
  warm_reference(o);
  auto report = run_convergence(
      dts, [&o](double dt) { return run_case(o, dt); }, threads, window);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& r = report.runs[i];
    std::vector<std::string> row{g17(r.dt), r.error ? g17(*r.error) : "",
                                 (i > 0 && report.pairwise[i - 1])
                                     ? g17(*report.pairwise[i - 1])
                                     : ""};
    rows.push_back(std::move(row));
  }
  write_csv(out, {"dt", "error", "order_pairwise"}, rows);

  for (const auto& r : report.runs)
    if (!r.error)
      std::cout << "dt=" << g17(r.dt) << " failed: " << r.note << '\n';
  if (report.observed_order) {
    std::cout << "observed_order=" << g17(*report.observed_order) << " window=["
              << g17(report.runs[report.window_first].dt) << ", "
              << g17(report.runs[report.window_last].dt) << "]\n";
    std::cout << "report written to " << out << '\n';
    return 0;
  }
  std::cout << "no stable convergence window; report written to " << out << '\n';
  return 2;
}

int cmd_work_precision(const CommonOpts& o, const std::vector<double>& dts,
                       const std::string& forms, const std::string& out) {
  std::vector<std::string> labels;
  if (o.problem == "complex-ode") {
    if (forms == "both") labels = {"complex", "real"};
    else labels = {forms};
  } else {
    labels = {resolve_method(o.method).name};
  }
  std::size_t n_ops = 0;
  std::vector<std::vector<std::string>> rows;
  for (const auto& label : labels) {
    CommonOpts run_opts = o;
    if (o.problem == "complex-ode") run_opts.form = label;
    warm_reference(run_opts);
    for (double dt : dts) {
      auto counts = std::make_shared<EvalCounts>();
      const auto start = std::chrono::steady_clock::now();
      double err = 0.0;
      std::string note;
      try {
        err = run_case(run_opts, dt, "", counts);
      } catch (const SolveError& e) {
        note = e.what();
      }
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      n_ops = std::max(n_ops, counts->calls.size());
      std::size_t dim = 1;
      if (o.problem == "adr2d") {
        const int np = adr_params(o).nx + 1;
        dim = static_cast<std::size_t>(np) * np;
      } else if (o.problem == "complex-ode") {
        dim = label == "real" ? 2 : 1;
      } else if (o.problem == "brusselator") {
        dim = 3 * static_cast<std::size_t>(brusselator_params(o).nx);
      }
      std::vector<std::string> row{label, g17(dt), note.empty() ? g17(err) : ""};
      for (long long c : counts->calls) row.push_back(std::to_string(c));
      row.push_back(std::to_string(counts->total()));
      row.push_back(std::to_string(work_units(*counts, dim)));
      row.push_back(g17(wall));
      rows.push_back(std::move(row));
      if (!note.empty())
        std::cout << label << " dt=" << g17(dt) << " failed: " << note << '\n';
    }
  }
  std::vector<std::string> header{"label", "dt", "error"};
  for (std::size_t k = 0; k < n_ops; ++k)
    header.push_back("calls_op" + std::to_string(k + 1));
  header.push_back("total_calls");
  header.push_back("work_units");
  header.push_back("wall_seconds");
  // pad rows whose operator count is below the widest run
  for (auto& row : rows)
    while (row.size() < header.size())
      row.insert(row.end() - 3, "0");
  write_csv(out, header, rows);
  std::cout << "work-precision table written to " << out << '\n';
  return 0;
}

int cmd_list_methods() {
  for (const auto& n : splitting_names()) {
    int order = 0;
    if (n.rfind("CLT", 0) == 0) order = make_splitting<Cx>(n, 3).order;
    else order = make_splitting<double>(n, 3).order;
    const bool pinned = (n == "PP3_4A-3" || n == "Yoshida");
    std::cout << n << ",splitting," << order << ',' << (pinned ? "3" : "any") << '\n';
  }
  for (const auto& n : rk_builtin_names())
    std::cout << n << ",runge-kutta," << builtin_tableau<double>(n).order << ",1\n";
  for (const auto& n : coupled_names())
    std::cout << n << ",coupled," << make_coupled<double>(n).order << ",2\n";
  for (const auto& n : multirate_names())
    std::cout << n << ",multirate," << make_multirate<double>(n).order << ",2\n";
  for (const auto& n : mri_names()) {
    auto m = make_mri<double>(n);
    std::cout << n << ",multirate-infinitesimal," << m.order << ','
              << m.n_operators() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"additive operator-splitting time integration workbench"};
  app.require_subcommand(1);

  CommonOpts opts;
  double dt = 0.0;
  std::vector<double> dts;
  std::string out_solve = "trajectory.csv";
  std::string out_converge = "converge.csv";
  std::string out_wp = "work_precision.csv";
  std::string fit_window;
  std::string forms = "both";
  unsigned threads = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_method) {
    cmd->add_option("--problem", opts.problem,
                    "adr2d | complex-ode | brusselator")->required();
    auto* m = cmd->add_option("--method,--scheme", opts.method,
                              "method name, case-insensitive (see list-methods)");
    if (needs_method) m->required();
    cmd->add_option("--split", opts.split,
                    "adr2d: 3|4; brusselator: s-f | i-e-f | 1-2");
    cmd->add_option("--form", opts.form, "complex-ode: complex | real");
    cmd->add_option("--sub", opts.sub,
                    "sub-integrator override for splitting schemes (fe, heun2, "
                    "rk3, rk4, be, itrap, dp54)");
    cmd->add_option("--substeps", opts.substeps,
                    "equal sub-steps per fraction span (stabilizes explicit "
                    "sub-integration at coarse macro steps)");
    cmd->add_option("--nx", opts.nx, "grid override (0 keeps the default)");
    cmd->add_option("--rate-ratio,-M", opts.rate_ratio,
                    "micro-steps per macro step for two-rate methods");
    cmd->add_option("--fast-rtol", opts.fast_rtol, "fast-scale relative tolerance");
    cmd->add_option("--fast-atol", opts.fast_atol, "fast-scale absolute tolerance");
    cmd->add_option("--newton-tol", opts.newton_tol, "implicit stage tolerance");
    cmd->add_option("--ref-tol", opts.ref_tol,
                    "reference tolerance override (atol = rtol)");
    cmd->add_option("--cache-dir", opts.cache_dir,
                    "reference cache directory (default: OPSPLIT_CACHE_DIR or "
                    "./opsplit_cache)");
  };

  CLI::App* solve = app.add_subcommand("solve", "one run; prints the error and "
                                                "writes the trajectory CSV");
  add_common(solve, true);
  solve->add_option("--dt", dt, "macro step size")->required();
  solve->add_option("--out", out_solve, "trajectory CSV path");

  CLI::App* conv = app.add_subcommand("converge",
                                      "step-size sweep against the cached "
                                      "reference; writes a report CSV");
  add_common(conv, true);
  conv->add_option("--dts", dts, "decreasing step sizes (comma separated)")
      ->required()
      ->delimiter(',');
  conv->add_option("--out", out_converge, "report CSV path");
  conv->add_option("--fit-window", fit_window,
                   "slope-fit window override, lo:hi indices into --dts");
  conv->add_option("--threads", threads,
                   "worker thread cap (default: OPSPLIT_THREADS or hardware)");

  CLI::App* wp = app.add_subcommand("work-precision",
                                    "error vs exact evaluation counts across "
                                    "step sizes");
  add_common(wp, true);
  wp->add_option("--dts", dts, "step sizes (comma separated)")
      ->required()
      ->delimiter(',');
  wp->add_option("--forms", forms, "complex-ode: complex | real | both");
  wp->add_option("--out", out_wp, "table CSV path");

  CLI::App* lm = app.add_subcommand("list-methods", "catalog dump: "
                                                    "name,kind,order,n_operators");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(solve)) return cmd_solve(opts, dt, out_solve);
    if (app.got_subcommand(conv))
      return cmd_converge(opts, dts, out_converge, fit_window, threads);
    if (app.got_subcommand(wp)) return cmd_work_precision(opts, dts, forms, out_wp);
    if (app.got_subcommand(lm)) return cmd_list_methods();
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const SolveError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  }
}
