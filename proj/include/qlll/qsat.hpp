#ifndef QLLL_QSAT_HPP
#define QLLL_QSAT_HPP

#include "qlll/core.hpp"
#include "qlll/subspace.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qlll {

// Qubit ordering: qubit 0 is the most significant bit of a computational-basis
// index, both globally (n qubits) and locally (the projector's qubit tuple).

/// Projector sum_t |v_t><v_t| acting on `qubits`, identity elsewhere.
struct Projector {
  std::vector<int> qubits;
  /// 2^k x r, orthonormal columns.
  Matrix vectors;

  int locality() const { return static_cast<int>(qubits.size()); }
  int rank() const { return static_cast<int>(vectors.cols()); }

  Matrix local_matrix() const { return vectors * vectors.adjoint(); }
};

struct QsatInstance {
  int n_qubits = 0;
  /// Nominal locality. Individual projectors may carry fewer qubits (decoupled instances).
  int k = 0;
  std::vector<Projector> projectors;

  std::size_t size() const { return projectors.size(); }
};

struct StateVector {
  int n_qubits = 0;
  Vector amplitudes;
};

inline void validate(const Projector &p, int n_qubits, const ToleranceConfig &tol = {}) {
  const int k = p.locality();
  if (k < 1) throw InvalidArgument("projector acts on no qubits");
  if (k > 30) throw InvalidArgument("projector locality too large");
  for (int q : p.qubits)
    if (q < 0 || q >= n_qubits) throw InvalidArgument("qubit index " + std::to_string(q) + " out of range");
  auto sorted = p.qubits;
  std::ranges::sort(sorted);
  if (std::ranges::adjacent_find(sorted) != sorted.end()) throw InvalidArgument("repeated qubit in projector");
  if (p.vectors.rows() != (Eigen::Index{1} << k))
    throw DimensionMismatch("projector vectors must have length 2^k");
  if (p.rank() < 1 || p.rank() > (1 << k)) throw InvalidArgument("projector rank out of range");
  if (!p.vectors.allFinite()) throw InvalidArgument("non-finite projector entries");
  const Matrix gram = p.vectors.adjoint() * p.vectors;
  const double err = (gram - Matrix::Identity(p.rank(), p.rank())).cwiseAbs().maxCoeff();
  if (!(err <= std::max(tol.tau_ortho, 1e-9))) throw InvalidArgument("projector vectors are not orthonormal");
}

inline void validate(const QsatInstance &inst, const ToleranceConfig &tol = {}) {
  if (inst.n_qubits < 0) throw InvalidArgument("negative qubit count");
  for (const auto &p : inst.projectors) {
    validate(p, inst.n_qubits, tol);
    if (p.locality() > inst.k) throw InvalidArgument("projector locality exceeds instance k");
  }
}

inline std::vector<int> qubit_degrees(const QsatInstance &inst) {
  std::vector<int> deg(static_cast<std::size_t>(inst.n_qubits), 0);
  for (const auto &p : inst.projectors)
    for (int q : p.qubits) ++deg[static_cast<std::size_t>(q)];
  return deg;
}

/// Haar-random unit vector in C^{2^k}: normalized i.i.d. complex Gaussians.
inline Vector haar_random_state(int k, SplitMix64 &rng) {
  if (k < 1 || k > 30) throw InvalidArgument("haar_random_state needs 1 <= k <= 30");
  const Eigen::Index dim = Eigen::Index{1} << k;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = Complex(re, im);
  }
  return v / v.norm();
}

inline Projector random_rank1_projector(std::vector<int> qubits, SplitMix64 &rng) {
  const int k = static_cast<int>(qubits.size());
  return Projector{std::move(qubits), haar_random_state(k, rng)};
}

namespace detail {

inline void require_brute_force(int n, const ToleranceConfig &tol) {
  if (n > tol.max_qubits) throw BruteForceBoundExceeded(n, tol.max_qubits);
}

/// Global-index offsets for each local basis index of a projector, plus the mask of its bits.
struct LocalLayout {
  std::vector<std::uint64_t> scatter;
  std::uint64_t mask = 0;

  LocalLayout(std::span<const int> qubits, int n) {
    const int k = static_cast<int>(qubits.size());
    scatter.assign(std::size_t{1} << k, 0);
    for (int j = 0; j < k; ++j) mask |= std::uint64_t{1} << (n - 1 - qubits[static_cast<std::size_t>(j)]);
    for (std::size_t l = 0; l < scatter.size(); ++l) {
      std::uint64_t g = 0;
      for (int j = 0; j < k; ++j)
        if ((l >> (k - 1 - j)) & 1U) g |= std::uint64_t{1} << (n - 1 - qubits[static_cast<std::size_t>(j)]);
      scatter[l] = g;
    }
  }

  /// Calls f(base) for every global index whose projector bits are all zero, ascending.
  template <class F>
  void for_each_base(int n, F &&f) const {
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t g = 0; g < total; ++g)
      if ((g & mask) == 0) f(g);
  }
};

}  // namespace detail

/// Π ψ without forming the 2^n x 2^n matrix.
inline Vector apply_projector(const Projector &p, const Vector &psi, int n) {
  if (psi.size() != (Eigen::Index{1} << n)) throw DimensionMismatch("state length does not match 2^n");
  const detail::LocalLayout layout(p.qubits, n);
  const auto local = static_cast<Eigen::Index>(layout.scatter.size());
  Vector out = Vector::Zero(psi.size());
  Vector x(local);
  layout.for_each_base(n, [&](std::uint64_t base) {
    for (Eigen::Index l = 0; l < local; ++l) x(l) = psi(static_cast<Eigen::Index>(base | layout.scatter[l]));
    const Vector y = p.vectors * (p.vectors.adjoint() * x);
    for (Eigen::Index l = 0; l < local; ++l) out(static_cast<Eigen::Index>(base | layout.scatter[l])) = y(l);
  });
  return out;
}

/// ‖Π ψ‖.
inline double projector_residual(const Projector &p, const Vector &psi, int n) {
  if (psi.size() != (Eigen::Index{1} << n)) throw DimensionMismatch("state length does not match 2^n");
  const detail::LocalLayout layout(p.qubits, n);
  const auto local = static_cast<Eigen::Index>(layout.scatter.size());
  Vector x(local);
  double acc = 0.0;
  layout.for_each_base(n, [&](std::uint64_t base) {
    for (Eigen::Index l = 0; l < local; ++l) x(l) = psi(static_cast<Eigen::Index>(base | layout.scatter[l]));
    acc += (p.vectors.adjoint() * x).squaredNorm();
  });
  return std::sqrt(acc);
}

/// Orthonormal columns spanning the range of the embedded projector (r * 2^{n-k} of them).
inline Matrix range_columns(const Projector &p, int n) {
  const detail::LocalLayout layout(p.qubits, n);
  const Eigen::Index r = p.rank();
  const Eigen::Index bases = Eigen::Index{1} << (n - p.locality());
  Matrix cols = Matrix::Zero(Eigen::Index{1} << n, r * bases);
  Eigen::Index b = 0;
  layout.for_each_base(n, [&](std::uint64_t base) {
    for (Eigen::Index t = 0; t < r; ++t)
      for (std::size_t l = 0; l < layout.scatter.size(); ++l)
        cols(static_cast<Eigen::Index>(base | layout.scatter[l]), b * r + t) =
            p.vectors(static_cast<Eigen::Index>(l), t);
    ++b;
  });
  return cols;
}

/// ker Π as a subspace of the n-qubit space.
inline Subspace satisfying_space(const Projector &p, int n, const ToleranceConfig &tol = {}) {
  detail::require_brute_force(n, tol);
  validate(p, n, tol);
  const AmbientSpace v(Eigen::Index{1} << n);
  return complement(Subspace::from_orthonormal(v, range_columns(p, n), ToleranceConfig{tol.tau_rank, 1e-8}));
}

namespace detail {

/// Eigen-decomposition of the PSD operator whose kernel is ∩ ker Π_i, on the smaller side:
/// the Gram matrix M†M of all range columns, or Σ Π_i itself when that is smaller.
struct KernelProblem {
  Eigen::Index dim = 0;
  Eigen::Index range_rank = 0;
  /// Set when the kernel basis is available directly (Σ Π_i route).
  std::optional<Matrix> kernel_basis;
  /// Set for the Gram route: orthonormal range basis.
  std::optional<Matrix> range_basis;
};

inline Eigen::Index rank_from_eigenvalues(const Eigen::VectorXd &ev, double tau_rank) {
  // ev ascending (SelfAdjointEigenSolver order).
  if (ev.size() == 0) return 0;
  const double top = ev(ev.size() - 1);
  if (!(top > 0.0)) return 0;
  const double cut = tau_rank * top;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > cut) ++r;
  return r;
}

inline Matrix projector_sum(const QsatInstance &inst) {
  const int n = inst.n_qubits;
  const Eigen::Index dim = Eigen::Index{1} << n;
  Matrix s = Matrix::Zero(dim, dim);
  for (const auto &p : inst.projectors) {
    const LocalLayout layout(p.qubits, n);
    const Matrix local = p.local_matrix();
    const auto loc = static_cast<Eigen::Index>(layout.scatter.size());
    layout.for_each_base(n, [&](std::uint64_t base) {
      for (Eigen::Index a = 0; a < loc; ++a)
        for (Eigen::Index b = 0; b < loc; ++b)
          s(static_cast<Eigen::Index>(base | layout.scatter[a]), static_cast<Eigen::Index>(base | layout.scatter[b])) +=
              local(a, b);
    });
  }
  return s;
}

inline KernelProblem solve_kernel(const QsatInstance &inst, bool want_basis, const ToleranceConfig &tol) {
  const int n = inst.n_qubits;
  const Eigen::Index dim = Eigen::Index{1} << n;
  KernelProblem out;
  out.dim = dim;
  Eigen::Index cols = 0;
  for (const auto &p : inst.projectors) cols += p.rank() * (Eigen::Index{1} << (n - p.locality()));
  if (cols == 0) {
    out.range_rank = 0;
    if (want_basis) out.range_basis = Matrix(dim, 0);
    return out;
  }
  if (cols < dim) {
    Matrix m(dim, cols);
    Eigen::Index c = 0;
    for (const auto &p : inst.projectors) {
      Matrix rc = range_columns(p, n);
      m.middleCols(c, rc.cols()) = rc;
      c += rc.cols();
    }
    const Matrix gram = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, want_basis ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    out.range_rank = rank_from_eigenvalues(es.eigenvalues(), tol.tau_rank);
    if (want_basis) {
      const Eigen::Index r = out.range_rank;
      Matrix u = m * es.eigenvectors().rightCols(r);
      if (r > 0) {
        Eigen::HouseholderQR<Matrix> qr(u);
        u = qr.householderQ() * Matrix::Identity(dim, r);
      }
      out.range_basis = std::move(u);
    }
    return out;
  }
  const Matrix s = projector_sum(inst);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, want_basis ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  out.range_rank = rank_from_eigenvalues(es.eigenvalues(), tol.tau_rank);
  if (want_basis) out.kernel_basis = es.eigenvectors().leftCols(dim - out.range_rank);
  return out;
}

}  // namespace detail

/// dim ∩_i ker Π_i via the null space of Σ_i Π_i (each Π_i is PSD, so ker Σ = ∩ ker).
inline Eigen::Index brute_force_sat_dim(const QsatInstance &inst, const ToleranceConfig &tol = {}) {
  detail::require_brute_force(inst.n_qubits, tol);
  validate(inst, tol);
  const auto kp = detail::solve_kernel(inst, false, tol);
  return kp.dim - kp.range_rank;
}

/// Exact R(∩ ker Π_i) = dim / 2^n.
inline Rational brute_force_relative_dimension(const QsatInstance &inst, const ToleranceConfig &tol = {}) {
  return Rational(brute_force_sat_dim(inst, tol), Eigen::Index{1} << inst.n_qubits);
}

/// Cross-check route: left-to-right subspace intersections of the individual kernels.
inline Eigen::Index iterated_intersection_dim(const QsatInstance &inst, const ToleranceConfig &tol = {}) {
  detail::require_brute_force(inst.n_qubits, tol);
  validate(inst, tol);
  const AmbientSpace v(Eigen::Index{1} << inst.n_qubits);
  Subspace acc = Subspace::full(v);
  for (const auto &p : inst.projectors) {
    acc = intersect(acc, satisfying_space(p, inst.n_qubits, tol), tol);
    if (acc.is_zero()) break;
  }
  return acc.rank();
}

struct StateCheck {
  std::vector<double> residuals;
  bool pass = true;
  double max_residual = 0.0;
};

inline StateCheck check_state(const QsatInstance &inst, const StateVector &psi, const ToleranceConfig &tol = {}) {
  if (psi.n_qubits != inst.n_qubits || psi.amplitudes.size() != (Eigen::Index{1} << inst.n_qubits))
    throw DimensionMismatch("state does not match instance size");
  StateCheck out;
  out.residuals.reserve(inst.size());
  for (const auto &p : inst.projectors) {
    const double r = projector_residual(p, psi.amplitudes, inst.n_qubits);
    out.residuals.push_back(r);
    out.max_residual = std::max(out.max_residual, r);
    if (!(r <= tol.tau_residual)) out.pass = false;
  }
  return out;
}

/// A unit state annihilated by every projector, or nullopt when the instance is unsatisfiable.
inline std::optional<StateVector> find_satisfying_state(const QsatInstance &inst, const ToleranceConfig &tol = {}) {
  detail::require_brute_force(inst.n_qubits, tol);
  validate(inst, tol);
  const Eigen::Index dim = Eigen::Index{1} << inst.n_qubits;
  StateVector out{inst.n_qubits, Vector::Zero(dim)};
  if (inst.projectors.empty()) {
    out.amplitudes(0) = 1.0;
    return out;
  }
  const auto kp = detail::solve_kernel(inst, true, tol);
  if (kp.range_rank == dim) return std::nullopt;
  if (kp.kernel_basis) {
    out.amplitudes = kp.kernel_basis->col(0);
  } else {
    // Project a fixed generic vector off the range; re-project once for accuracy.
    SplitMix64 rng(0x5eedULL);
    Vector x(dim);
    for (Eigen::Index i = 0; i < dim; ++i) x(i) = Complex(rng.normal(), rng.normal());
    const Matrix &u = *kp.range_basis;
    for (int pass = 0; pass < 2; ++pass) x -= u * (u.adjoint() * x);
    out.amplitudes = x / x.norm();
  }
  return out;
}

/// Sub-instance on a subset of qubits: keeps the listed projectors (which must act only on
/// `qubits`) and relabels qubits by their position in the sorted `qubits` list.
inline QsatInstance restrict_instance(const QsatInstance &inst, std::span<const std::size_t> projector_ids,
                                      std::vector<int> qubits) {
  std::ranges::sort(qubits);
  std::vector<int> relabel(static_cast<std::size_t>(inst.n_qubits), -1);
  for (std::size_t i = 0; i < qubits.size(); ++i) relabel[static_cast<std::size_t>(qubits[i])] = static_cast<int>(i);
  QsatInstance out{static_cast<int>(qubits.size()), inst.k, {}};
  for (auto id : projector_ids) {
    Projector p = inst.projectors.at(id);
    for (int &q : p.qubits) {
      const int to = relabel[static_cast<std::size_t>(q)];
      if (to < 0) throw InvalidArgument("projector acts outside the restricted qubit set");
      q = to;
    }
    out.projectors.push_back(std::move(p));
  }
  return out;
}

}  // namespace qlll

#endif  // QLLL_QSAT_HPP
