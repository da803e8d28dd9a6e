#ifndef QLLL_CORE_HPP
#define QLLL_CORE_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qlll {

inline constexpr const char *kVersion = "0.1.0";

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Exact rationals for relative dimensions, y-vectors and certificate bounds.
using Rational = boost::multiprecision::cpp_rational;

inline constexpr double kE = std::numbers::e;

/// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// R(A|B) with B = {0}.
class DegenerateConditioning : public Error {
 public:
  using Error::Error;
};

class BruteForceBoundExceeded : public Error {
 public:
  BruteForceBoundExceeded(int n, int bound)
      : Error("instance has " + std::to_string(n) + " qubits, brute-force bound is " +
              std::to_string(bound) + " (override with --max-qubits)"),
        n_qubits(n),
        max_qubits(bound) {}
  int n_qubits;
  int max_qubits;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

struct ToleranceConfig {
  /// Singular values below tau_rank * sigma_max count as zero (for sums and intersections of
  /// orthonormal bases the scale is 1, so the cut applies to sines of principal angles).
  double tau_rank = 1e-9;
  double tau_ortho = 1e-10;
  double tau_residual = 1e-8;
  /// Largest qubit count the dense oracles accept.
  int max_qubits = 14;

  void validate() const {
    if (!(tau_rank > 0) || !(tau_ortho > 0) || !(tau_residual > 0))
      throw InvalidArgument("tolerances must be strictly positive");
    if (max_qubits < 1 || max_qubits > 24) throw InvalidArgument("max_qubits must lie in [1, 24]");
  }
};

inline double to_double(const Rational &r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational &r) {
  auto num = boost::multiprecision::numerator(r);
  auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

/// Counter-based 64-bit generator: output i is the SplitMix64 finalizer applied to
/// seed + (i+1) * golden. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

  /// Standard normal via Box-Muller; no cached spare so the stream is position-independent.
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

enum class Verdict { pass, fail, inconclusive };

inline const char *to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Per-trial stream seed: master ^ trial.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial) { return master ^ trial; }

}  // namespace qlll

#endif  // QLLL_CORE_HPP
