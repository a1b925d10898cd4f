#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace holo {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;

inline constexpr int kMaxVars = 16;

enum class errc {
  parse,
  pole,
  arity,
  domain,
  hypothesis,
  convergence,
  budget,
  degeneracy,
  sampling,
  unbounded,
  invalid_argument,
};

/** Error with a machine-readable category. `hypothesis` marks violated
 *  mathematical preconditions (non-self-map, missing convexity, ...) and is
 *  reported separately from internal failures by the CLI. */
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw error(code, msg); }

inline void require(bool cond, errc code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::parse: return "parse";
    case errc::pole: return "pole";
    case errc::arity: return "arity";
    case errc::domain: return "domain";
    case errc::hypothesis: return "hypothesis";
    case errc::convergence: return "convergence";
    case errc::budget: return "budget";
    case errc::degeneracy: return "degeneracy";
    case errc::sampling: return "sampling";
    case errc::unbounded: return "unbounded";
    case errc::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

/** artanh with the argument clamped at 1-1e-15; beyond the clamp the input is
 *  treated as a boundary degeneracy rather than silently returning inf. */
inline double artanh_checked(double t) {
  require(t >= 0.0 && std::isfinite(t), errc::invalid_argument, "artanh argument must be finite and nonnegative");
  constexpr double clamp = 1.0 - 1e-15;
  require(t <= clamp, errc::degeneracy, "artanh argument exceeds 1-1e-15 (boundary degeneracy)");
  return 0.5 * std::log1p(2.0 * t / (1.0 - t));
}

inline double sqr(double x) { return x * x; }

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/** Deterministic RNG wrapper; every randomized routine takes an explicit seed. */
class rng {
 public:
  explicit rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  cplx disc_point(double radius) {
    double r = radius * std::sqrt(uniform(0.0, 1.0));
    double th = uniform(0.0, 2.0 * M_PI);
    return std::polar(r, th);
  }
  cplx unit() { return std::polar(1.0, uniform(0.0, 2.0 * M_PI)); }
  std::uint64_t raw() { return gen_(); }

  /** Derive an independent stream, e.g. one per product factor. */
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ull));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace holo
