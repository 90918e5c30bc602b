#pragma once

// High-accuracy reference trajectories: the summed (monolithic) right-hand
// side is integrated with the embedded 5(4) pair at a tight tolerance and
// sampled at requested times. Results are cached on disk keyed by a SHA-256
// content hash of the problem identity, tolerance, and sample times; files are
// written once via atomic rename and then only read.

#include <opsplit/core.hpp>
#include <opsplit/harness/csv.hpp>
#include <opsplit/onestep.hpp>
#include <opsplit/tableau.hpp>

#include <openssl/evp.h>

#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace opsplit::harness {

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw SolveError("sha256_hex: digest failure");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

inline std::string default_cache_dir() {
  if (const char* env = std::getenv("OPSPLIT_CACHE_DIR"); env && *env) return env;
  return "./opsplit_cache";
}

namespace detail {

constexpr const char* kRefMagic = "OPSPLIT-REF-1";

inline void scalar_to_stream(std::ostream& os, double v) { os << g17(v); }
inline void scalar_to_stream(std::ostream& os, const std::complex<double>& v) {
  os << g17(v.real()) << ' ' << g17(v.imag());
}

inline bool scalar_from_stream(std::istream& is, double& v) {
  return static_cast<bool>(is >> v);
}
inline bool scalar_from_stream(std::istream& is, std::complex<double>& v) {
  double re, im;
  if (!(is >> re >> im)) return false;
  v = {re, im};
  return true;
}

template <class S>
std::string cache_key(const std::string& problem_id, std::size_t dim,
                      const std::vector<double>& t_samples, double t0,
                      Tolerance tol) {
  std::ostringstream key;
  key << kRefMagic << '|' << problem_id << '|'
      << (is_complex_v<S> ? 'c' : 'r') << dim << "|t0=" << g17(t0)
      << "|atol=" << g17(tol.atol) << "|rtol=" << g17(tol.rtol) << "|samples=";
  for (double t : t_samples) key << g17(t) << ';';
  return key.str();
}

template <class S>
bool load_reference(const std::filesystem::path& file, const std::string& problem_id,
                    std::size_t dim, std::size_t n_samples,
                    std::vector<Vec<S>>& out) {
  std::ifstream in(file);
  if (!in) return false;
  std::string magic, id, field;
  std::size_t fdim = 0, fsamples = 0;
  if (!std::getline(in, magic) || magic != kRefMagic) return false;
  if (!std::getline(in, id) || id != problem_id) return false;
  if (!(in >> field >> fdim >> fsamples)) return false;
  if (field != (is_complex_v<S> ? "c" : "r") || fdim != dim || fsamples != n_samples)
    return false;
  out.assign(n_samples, Vec<S>(dim));
  for (std::size_t k = 0; k < n_samples; ++k) {
    double t;
    if (!(in >> t)) return false;
    for (std::size_t i = 0; i < dim; ++i)
      if (!scalar_from_stream(in, out[k][i])) return false;
  }
  return true;
}

template <class S>
void store_reference(const std::filesystem::path& dir,
                     const std::filesystem::path& file,
                     const std::string& problem_id,
                     const std::vector<double>& t_samples,
                     const std::vector<Vec<S>>& states) {
  std::filesystem::create_directories(dir);
  std::random_device rd;
  const std::filesystem::path tmp =
      dir / (file.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw SolveError("reference cache: cannot write " + tmp.string());
    out << kRefMagic << '\n' << problem_id << '\n'
        << (is_complex_v<S> ? 'c' : 'r') << ' ' << states.front().size() << ' '
        << states.size() << '\n';
    for (std::size_t k = 0; k < states.size(); ++k) {
      out << g17(t_samples[k]) << '\n';
      for (const S& v : states[k]) {
        scalar_to_stream(out, v);
        out << '\n';
      }
    }
    if (!out) throw SolveError("reference cache: write failed on " + tmp.string());
  }
  std::filesystem::rename(tmp, file);  // atomic publish: last writer wins
}

}  // namespace detail

// States at t_samples (ascending, all > t0), integrating the summed operators
// from (t0, y0). Cached under cache_dir (default: OPSPLIT_CACHE_DIR or
// ./opsplit_cache); pass an empty problem_id to skip caching entirely.
template <class S>
std::vector<Vec<S>> reference_solution(const AdditiveProblem<S>& problem,
                                       const std::string& problem_id,
                                       const std::vector<double>& t_samples,
                                       Tolerance tol, double t0 = 0.0,
                                       std::string cache_dir = "") {
  problem.validate();
  if (t_samples.empty()) throw UsageError("reference_solution: no sample times");
  for (std::size_t k = 0; k < t_samples.size(); ++k)
    if (t_samples[k] <= (k ? t_samples[k - 1] : t0))
      throw UsageError("reference_solution: sample times must ascend from t0");

  const std::size_t dim = problem.dim();
  std::filesystem::path file;
  if (!problem_id.empty()) {
    if (cache_dir.empty()) cache_dir = default_cache_dir();
    const std::string key =
        detail::cache_key<S>(problem_id, dim, t_samples, t0, tol);
    file = std::filesystem::path(cache_dir) / (sha256_hex(key) + ".ref");
    std::vector<Vec<S>> cached;
    if (detail::load_reference<S>(file, problem_id, dim, t_samples.size(), cached))
      return cached;
  }

  Operator<S> rhs = [&problem](S t, const Vec<S>& y) { return problem.full_rhs(t, y); };
  const EmbeddedTableau<S> pair = builtin_embedded<S>("DP54");
  std::vector<Vec<S>> states;
  states.reserve(t_samples.size());
  Vec<S> y = problem.y0;
  double t = t0;
  for (double ts : t_samples) {
    try {
      y = adaptive_integrate<S>(rhs, pair, S(t), S(ts - t), y, tol);
    } catch (const SolveError& e) {
      throw SolveError("reference_solution('" + problem_id + "') failed near t = " +
                       std::to_string(t) + ": " + e.what() +
                       "; try a looser tolerance");
    }
    t = ts;
    states.push_back(y);
  }

  if (!problem_id.empty())
    detail::store_reference<S>(std::filesystem::path(cache_dir), file, problem_id,
                               t_samples, states);
  return states;
}

}  // namespace opsplit::harness
