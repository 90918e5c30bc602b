#pragma once

// Named splitting tables and coupled/multirate/infinitesimal methods, all
// constructed on demand in the requested scalar field.

#include <opsplit/ark.hpp>
#include <opsplit/core.hpp>
#include <opsplit/fractional.hpp>
#include <opsplit/gark.hpp>
#include <opsplit/mri.hpp>
#include <opsplit/multirate.hpp>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace opsplit {

// ---- splitting tables ----

inline const std::vector<std::string>& splitting_names() {
  static const std::vector<std::string> names = {
      "Godunov", "Strang", "PP3_4A-3", "Yoshida", "YoshidaComp", "CLT2", "CLT3"};
  return names;
}

// First-order sweep: every operator takes the full step once.
template <class S>
SplittingScheme<S> splitting_godunov(std::size_t n_ops) {
  if (n_ops < 1) throw UsageError("Godunov: need at least one operator");
  return SplittingScheme<S>({Vec<S>(n_ops, S(1))}, "Godunov", 1);
}

// Symmetric sweep: half steps up through the operators, a full step on the
// last, then half steps back down, with adjacent same-operator flows merged.
template <class S>
SplittingScheme<S> splitting_strang(std::size_t n_ops) {
  if (n_ops < 1) throw UsageError("Strang: need at least one operator");
  if (n_ops == 1) return SplittingScheme<S>({Vec<S>(1, S(1))}, "Strang", 2);
  std::vector<Vec<S>> alpha(n_ops, Vec<S>(n_ops, S(0)));
  for (std::size_t l = 0; l + 1 < n_ops; ++l) alpha[0][l] = S(0.5);
  alpha[0][n_ops - 1] = S(1);
  for (std::size_t k = 1; k < n_ops; ++k) alpha[k][n_ops - 1 - k] = S(0.5);
  return SplittingScheme<S>(std::move(alpha), "Strang", 2);
}

// Three-operator, six-stage, third-order table with palindromic columns.
template <class S>
SplittingScheme<S> splitting_pp3_4a3() {
  const double a1 = 0.461601939364879971, a2 = -0.266589223588183997,
               a3 = -0.360420727960349671, b1 = -0.067871053050780081,
               b2 = 0.092457673314333835, b3 = 0.579154058410941403,
               c1 = -0.095886885226072025, c2 = 0.674131550273850162,
               c3 = 0.483422668461380403;
  std::vector<Vec<S>> alpha = {
      {S(a1), S(a2), S(a3)}, {S(b1), S(b2), S(b3)}, {S(c1), S(c2), S(c3)},
      {S(c3), S(c2), S(c1)}, {S(b3), S(b2), S(b1)}, {S(a3), S(a2), S(a1)}};
  return SplittingScheme<S>(std::move(alpha), "PP3_4A-3", 3);
}

// Triple-jump composition of the symmetric sweep for three operators, with
// adjacent same-operator flows merged into seven stages; fourth order.
template <class S>
SplittingScheme<S> splitting_yoshida3() {
  const double th = 1.0 / (2.0 - std::cbrt(2.0));
  const double h2 = th / 2, m = 1.0 - 2.0 * th;
  std::vector<Vec<S>> alpha = {
      {S(0), S(0), S(h2)},        {S(0), S(h2), S(0)},
      {S(th), S(h2), S((1.0 - th) / 2)}, {S(0), S(m / 2), S(0)},
      {S(m), S(m / 2), S((1.0 - th) / 2)}, {S(0), S(h2), S(0)},
      {S(th), S(h2), S(h2)}};
  return SplittingScheme<S>(std::move(alpha), "Yoshida", 4);
}

// The same triple-jump for any operator count, written as three unmerged
// sweep blocks (the merged table coincides with it under exact sub-flows).
template <class S>
SplittingScheme<S> splitting_yoshida_comp(std::size_t n_ops) {
  if (n_ops < 1) throw UsageError("YoshidaComp: need at least one operator");
  const double th = 1.0 / (2.0 - std::cbrt(2.0));
  std::vector<Vec<S>> alpha;
  for (double f : {th, 1.0 - 2.0 * th, th}) {
    // reversed half sweep: operators N..2 take f/2, then operator 1 takes f
    // while 2..N close their halves
    for (std::size_t k = 0; k + 1 < n_ops; ++k) {
      Vec<S> row(n_ops, S(0));
      row[n_ops - 1 - k] = S(f / 2);
      alpha.push_back(std::move(row));
    }
    Vec<S> last(n_ops, S(f / 2));
    last[0] = S(f);
    alpha.push_back(std::move(last));
  }
  return SplittingScheme<S>(std::move(alpha), "YoshidaComp", 4);
}

// Conjugate-pair table: both stages use (1 +- i)/2 on every operator.
template <class S>
SplittingScheme<S> splitting_clt2(std::size_t n_ops) {
  if constexpr (!is_complex_v<S>) {
    throw UsageError("CLT2 needs the complex scalar field");
  } else {
    if (n_ops < 1) throw UsageError("CLT2: need at least one operator");
    const S a(0.5, 0.5), b(0.5, -0.5);
    return SplittingScheme<S>({Vec<S>(n_ops, a), Vec<S>(n_ops, b)}, "CLT2", 2);
  }
}

// Four-stage third-order table with fractions (1/4 +- 1/(4 sqrt 3)) paired
// off the real axis; columns sum to one exactly.
template <class S>
SplittingScheme<S> splitting_clt3(std::size_t n_ops) {
  if constexpr (!is_complex_v<S>) {
    throw UsageError("CLT3 needs the complex scalar field");
  } else {
    if (n_ops < 1) throw UsageError("CLT3: need at least one operator");
    const double a = 0.25, b = 0.25 / std::sqrt(3.0);
    const S r1(a - b, a + b), r2(a + b, -a + b), r3(a + b, a - b), r4(a - b, -a - b);
    return SplittingScheme<S>(
        {Vec<S>(n_ops, r1), Vec<S>(n_ops, r2), Vec<S>(n_ops, r3), Vec<S>(n_ops, r4)},
        "CLT3", 3);
  }
}

template <class S>
SplittingScheme<S> make_splitting(const std::string& name, std::size_t n_ops) {
  if (name == "Godunov") return splitting_godunov<S>(n_ops);
  if (name == "Strang") return splitting_strang<S>(n_ops);
  if (name == "PP3_4A-3") {
    if (n_ops != 3) throw UsageError("PP3_4A-3 is a three-operator table");
    return splitting_pp3_4a3<S>();
  }
  if (name == "Yoshida") {
    if (n_ops != 3) throw UsageError("Yoshida (merged table) is a three-operator table; use YoshidaComp for other counts");
    return splitting_yoshida3<S>();
  }
  if (name == "YoshidaComp") return splitting_yoshida_comp<S>(n_ops);
  if (name == "CLT2") return splitting_clt2<S>(n_ops);
  if (name == "CLT3") return splitting_clt3<S>(n_ops);
  std::string msg = "unknown splitting '" + name + "'; available:";
  for (const auto& n : splitting_names()) msg += " " + n;
  throw UsageError(msg);
}

// ---- coupled (generalized additive) methods ----

inline const std::vector<std::string>& coupled_names() {
  static const std::vector<std::string> names = {"IMEX-GARK2"};
  return names;
}

// Second-order pair: three explicit stages against two singly-diagonally
// implicit stages. Operator 1 is treated explicitly, operator 2 implicitly.
template <class S>
GarkMethod<S> gark_imex2() {
  Matrix<S> Aee = {{S(0), S(0), S(0)}, {S(0.5), S(0), S(0)}, {S(0.5), S(0.5), S(0)}};
  Matrix<S> Aei = {{S(0), S(0)}, {S(0.5), S(0)}, {S(0.5), S(0.5)}};
  Matrix<S> Aie = {{S(0.25), S(0), S(0)}, {S(0.25), S(0.5), S(0)}};
  Matrix<S> Aii = {{S(0.25), S(0)}, {S(0.5), S(0.25)}};
  return GarkMethod<S>({{Aee, Aei}, {Aie, Aii}},
                       {{S(0.25), S(0.5), S(0.25)}, {S(0.5), S(0.5)}}, 2,
                       "IMEX-GARK2");
}

template <class S>
GarkMethod<S> make_coupled(const std::string& name) {
  if (name == "IMEX-GARK2") return gark_imex2<S>();
  std::string msg = "unknown coupled method '" + name + "'; available:";
  for (const auto& n : coupled_names()) msg += " " + n;
  throw UsageError(msg);
}

// ---- multirate methods ----

inline const std::vector<std::string>& multirate_names() {
  static const std::vector<std::string> names = {"MrGARK-EX2-IM2"};
  return names;
}

// Explicit two-stage fast method against an implicit two-stage slow method,
// second order for any micro-step count M.
template <class S>
MrGarkMethod<S> mrgark_ex2_im2() {
  const double r = 1.0 / std::sqrt(2.0);
  MrGarkMethod<S> m;
  m.A_FF = {{S(0), S(0)}, {S(2.0 / 3.0), S(0)}};
  m.b_F = {S(0.25), S(0.75)};
  m.A_SS = {{S(1.0 - r), S(0)}, {S(r), S(1.0 - r)}};
  m.b_S = {S(r), S(1.0 - r)};
  m.A_FS = [](std::size_t mu, std::size_t M) {
    return Matrix<S>{{S(double(mu - 1) / double(M)), S(0)},
                     {S(double(3 * mu - 1) / double(3 * M)), S(0)}};
  };
  m.A_SF = [r](std::size_t mu, std::size_t M) {
    if (mu == 1)
      return Matrix<S>{{S(double(M) * (1.0 - r)), S(0)}, {S(0.25), S(0.75)}};
    return Matrix<S>{{S(0), S(0)}, {S(0.25), S(0.75)}};
  };
  m.order = 2;
  m.name = "MrGARK-EX2-IM2";
  return m;
}

template <class S>
MrGarkMethod<S> make_multirate(const std::string& name) {
  if (name == "MrGARK-EX2-IM2") return mrgark_ex2_im2<S>();
  std::string msg = "unknown multirate method '" + name + "'; available:";
  for (const auto& n : multirate_names()) msg += " " + n;
  throw UsageError(msg);
}

// ---- multirate infinitesimal methods ----

inline const std::vector<std::string>& mri_names() {
  static const std::vector<std::string> names = {"MRI-IRK2", "MRI-ESDIRK3a",
                                                 "MRI-IMEX3"};
  return names;
}

// Second-order implicit method built on the trapezoidal rule.
template <class S>
MriMethod<S> mri_irk2() {
  const std::size_t s = 4;
  Matrix<S> G(s, Vec<S>(s, S(0)));
  G[1][0] = S(1);
  G[2][0] = S(-0.5);
  G[2][2] = S(0.5);
  return MriMethod<S>({0.0, 1.0, 1.0, 1.0}, {G}, {}, 2, "MRI-IRK2");
}

// Third-order method built on a four-stage ESDIRK core.
template <class S>
MriMethod<S> mri_esdirk3a() {
  const double lam = 0.435866521508458999416019;
  const std::size_t s = 8;
  Matrix<S> G(s, Vec<S>(s, S(0)));
  G[1][0] = S(1.0 / 3.0);
  G[2][0] = S(-lam);
  G[2][2] = S(lam);
  G[3][0] = S((3.0 - 10.0 * lam) / (24.0 * lam - 6.0));
  G[3][2] = S((5.0 - 18.0 * lam) / (6.0 - 24.0 * lam));
  G[4][0] = S((-24.0 * lam * lam + 6.0 * lam + 1.0) / (6.0 - 24.0 * lam));
  G[4][2] = S((-48.0 * lam * lam + 12.0 * lam + 1.0) / (24.0 * lam - 6.0));
  G[4][4] = S(lam);
  G[5][0] = S((3.0 - 16.0 * lam) / (12.0 - 48.0 * lam));
  G[5][2] = S((48.0 * lam * lam - 21.0 * lam + 2.0) / (12.0 * lam - 3.0));
  G[5][4] = S((3.0 - 16.0 * lam) / 4.0);
  G[6][0] = S(-lam);
  G[6][6] = S(lam);
  const double th = 1.0 / 3.0;
  return MriMethod<S>({0.0, th, th, 2.0 * th, 2.0 * th, 1.0, 1.0, 1.0}, {G}, {}, 3,
                      "MRI-ESDIRK3a");
}

// Third-order implicit-explicit pair sharing the ESDIRK core.
template <class S>
MriMethod<S> mri_imex3() {
  const double lam = 0.4358665215084589994160194511935568425;
  const double c4 = 0.7179332607542294997080097255967784213;
  const std::size_t s = 8;
  Matrix<S> G(s, Vec<S>(s, S(0)));
  G[1][0] = S(lam);
  G[2][0] = S(-lam);
  G[2][2] = S(lam);
  G[3][0] = S(-0.4103336962288525014599513720161078937);
  G[3][2] = S(0.6924004354746230017519416464193294724);
  G[4][0] = S(0.4103336962288525014599513720161078937);
  G[4][2] = S(-0.8462002177373115008759708232096647362);
  G[4][4] = S(lam);
  G[5][0] = S(lam);
  G[5][2] = S(0.9264299099302395700444874096601015328);
  G[5][4] = S(-1.080229692192928069168516586450436797);
  G[6][0] = S(-lam);
  G[6][6] = S(lam);
  Matrix<S> O(s, Vec<S>(s, S(0)));
  O[1][0] = S(lam);
  O[3][0] = S(-0.5688715801234400928465032925317932021);
  O[3][2] = S(0.8509383193692105931384935669350147809);
  O[4][0] = S(0.454283944643608855878770886900124654);
  O[4][2] = S(-0.454283944643608855878770886900124654);
  O[5][0] = S(-0.4271371821005074011706645050390732474);
  O[5][2] = S(0.1562747733103380821014660497037023496);
  O[5][4] = S(0.5529291480359398193611887297385924765);
  O[7][0] = S(0.105858296071879638722377459477184953);
  O[7][2] = S(0.655567501140070250975288954324730635);
  O[7][4] = S(-1.197292318720408889113685864995472431);
  O[7][6] = S(lam);
  return MriMethod<S>({0.0, lam, lam, c4, c4, 1.0, 1.0, 1.0}, {G}, {O}, 3,
                      "MRI-IMEX3");
}

template <class S>
MriMethod<S> make_mri(const std::string& name) {
  if (name == "MRI-IRK2") return mri_irk2<S>();
  if (name == "MRI-ESDIRK3a") return mri_esdirk3a<S>();
  if (name == "MRI-IMEX3") return mri_imex3<S>();
  std::string msg = "unknown infinitesimal method '" + name + "'; available:";
  for (const auto& n : mri_names()) msg += " " + n;
  throw UsageError(msg);
}

}  // namespace opsplit
