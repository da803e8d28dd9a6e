#ifndef QLLL_SUBSPACE_HPP
#define QLLL_SUBSPACE_HPP

#include "qlll/core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace qlll {

struct AmbientSpace {
  Eigen::Index dim = 1;

  explicit AmbientSpace(Eigen::Index d) : dim(d) {
    if (d < 1) throw InvalidArgument("ambient dimension must be >= 1");
  }
  friend bool operator==(AmbientSpace, AmbientSpace) = default;
};

/// A linear subspace of C^d stored as an orthonormal basis (columns).
/// Immutable; the zero subspace has an empty basis.
class Subspace {
 public:
  /// Wraps a basis that is already orthonormal. Checked against tol.tau_ortho.
  static Subspace from_orthonormal(AmbientSpace ambient, Matrix basis, const ToleranceConfig &tol = {}) {
    if (basis.rows() != ambient.dim && basis.cols() > 0)
      throw DimensionMismatch("basis rows do not match ambient dimension");
    if (basis.cols() > ambient.dim) throw DimensionMismatch("more basis vectors than ambient dimension");
    if (basis.cols() > 0) {
      const Matrix gram = basis.adjoint() * basis;
      const double err = (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
      if (!(err <= tol.tau_ortho)) throw InvalidArgument("basis is not orthonormal");
    }
    return Subspace(ambient, std::move(basis));
  }

  static Subspace zero(AmbientSpace ambient) { return Subspace(ambient, Matrix(ambient.dim, 0)); }

  static Subspace full(AmbientSpace ambient) {
    return Subspace(ambient, Matrix::Identity(ambient.dim, ambient.dim));
  }

  AmbientSpace ambient() const { return ambient_; }
  Eigen::Index dim() const { return ambient_.dim; }
  Eigen::Index rank() const { return basis_.cols(); }
  const Matrix &basis() const { return basis_; }
  bool is_zero() const { return rank() == 0; }

  /// Orthogonal projector onto the subspace, materialized on demand.
  Matrix projector() const { return basis_ * basis_.adjoint(); }

  /// Distance from v to the subspace.
  double residual(const Vector &v) const {
    if (v.size() != dim()) throw DimensionMismatch("vector length does not match ambient dimension");
    if (rank() == 0) return v.norm();
    return (v - basis_ * (basis_.adjoint() * v)).norm();
  }

  bool contains(const Vector &v, const ToleranceConfig &tol = {}) const { return residual(v) <= tol.tau_residual; }

 private:
  Subspace(AmbientSpace ambient, Matrix basis) : ambient_(ambient), basis_(std::move(basis)) {
    if (basis_.rows() != ambient_.dim) basis_.resize(ambient_.dim, 0);
  }

  friend Subspace span_columns(const Matrix &, AmbientSpace, const ToleranceConfig &);
  friend Subspace complement(const Subspace &);
  friend Subspace sum(const Subspace &, const Subspace &, const ToleranceConfig &);
  friend Subspace intersect(const Subspace &, const Subspace &, const ToleranceConfig &);

  AmbientSpace ambient_;
  Matrix basis_;
};

namespace detail {

inline void require_finite(const Matrix &m) {
  if (!m.allFinite()) throw InvalidArgument("non-finite entries in input vectors");
}

inline void require_same_ambient(const Subspace &a, const Subspace &b) {
  if (a.ambient() != b.ambient()) throw DimensionMismatch("subspaces live in different ambient spaces");
}

/// Numerical rank of a singular-value list (sorted descending) under the relative threshold.
inline Eigen::Index numerical_rank(const Eigen::VectorXd &sv, double tau_rank) {
  if (sv.size() == 0 || !(sv(0) > 0.0)) return 0;
  const double cut = tau_rank * sv(0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  return r;
}

}  // namespace detail

/// Orthonormal basis of the column span of m.
inline Subspace span_columns(const Matrix &m, AmbientSpace ambient, const ToleranceConfig &tol) {
  if (m.cols() == 0) return Subspace::zero(ambient);
  if (m.rows() != ambient.dim) throw DimensionMismatch("vector length does not match ambient dimension");
  detail::require_finite(m);
  // JacobiSVD rather than BDCSVD: the divide-and-conquer solver in Eigen 3.4 can return wrong
  // singular values on complex input with repeated columns, silently corrupting ranks.
  Eigen::JacobiSVD<Matrix> jac(m, Eigen::ComputeThinU);
  const Eigen::Index r = detail::numerical_rank(jac.singularValues(), tol.tau_rank);
  return Subspace(ambient, jac.matrixU().leftCols(r));
}

inline Subspace span(std::span<const Vector> vectors, AmbientSpace ambient, const ToleranceConfig &tol = {}) {
  Matrix m(ambient.dim, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != ambient.dim) throw DimensionMismatch("vector length does not match ambient dimension");
    m.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  return span_columns(m, ambient, tol);
}

inline Subspace complement(const Subspace &a) {
  const auto d = a.dim();
  const auto r = a.rank();
  if (r == 0) return Subspace::full(a.ambient());
  if (r == d) return Subspace::zero(a.ambient());
  Eigen::HouseholderQR<Matrix> qr(a.basis());
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  return Subspace(a.ambient(), q.rightCols(d - r));
}

/// A + B as A plus the part of B orthogonal to A. Singular values of that part are the sines
/// of the principal angles, so the rank cut is tau_rank on the unit scale of the bases.
inline Subspace sum(const Subspace &a, const Subspace &b, const ToleranceConfig &tol = {}) {
  detail::require_same_ambient(a, b);
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const Matrix &qa = a.basis();
  Matrix rest = b.basis() - qa * (qa.adjoint() * b.basis());
  rest -= qa * (qa.adjoint() * rest);  // second pass keeps the new directions orthogonal to A
  Eigen::JacobiSVD<Matrix> svd(rest, Eigen::ComputeThinU);
  const auto &sv = svd.singularValues();
  Eigen::Index extra = 0;
  while (extra < sv.size() && sv(extra) > tol.tau_rank) ++extra;
  if (extra == 0) return a;
  Matrix basis(a.dim(), a.rank() + extra);
  basis << qa, svd.matrixU().leftCols(extra);
  return Subspace(a.ambient(), std::move(basis));
}

/// A ∩ B as A·null((I - B B^H) A), taking A to be the smaller of the two.
inline Subspace intersect(const Subspace &a, const Subspace &b, const ToleranceConfig &tol = {}) {
  detail::require_same_ambient(a, b);
  if (a.is_zero() || b.is_zero()) return Subspace::zero(a.ambient());
  if (a.rank() == a.dim()) return b;
  if (b.rank() == b.dim()) return a;
  if (a.rank() > b.rank()) return intersect(b, a, tol);
  const Matrix &qa = a.basis();
  const Matrix &qb = b.basis();
  const Matrix off = qa - qb * (qb.adjoint() * qa);
  Eigen::JacobiSVD<Matrix> svd(off, Eigen::ComputeFullV);
  const auto &sv = svd.singularValues();
  Eigen::Index outside = 0;
  while (outside < sv.size() && sv(outside) > tol.tau_rank) ++outside;
  const Eigen::Index r = a.rank() - outside;
  if (r == 0) return Subspace::zero(a.ambient());
  return Subspace(a.ambient(), qa * svd.matrixV().rightCols(r));
}

inline Rational relative_dimension(const Subspace &a) { return Rational(a.rank(), a.dim()); }

/// R(A|B) = dim(A ∩ B) / dim(B). Throws DegenerateConditioning when B = {0}.
inline Rational conditional_r(const Subspace &a, const Subspace &b, const ToleranceConfig &tol = {}) {
  detail::require_same_ambient(a, b);
  if (b.is_zero()) throw DegenerateConditioning("conditioning on the zero subspace");
  return Rational(intersect(a, b, tol).rank(), b.rank());
}

/// rank(A ∩ B) * dim(V) == rank(A) * rank(B), checked in integers.
inline bool is_r_independent(const Subspace &a, const Subspace &b, const ToleranceConfig &tol = {}) {
  detail::require_same_ambient(a, b);
  const auto both = intersect(a, b, tol).rank();
  return both * a.dim() == a.rank() * b.rank();
}

enum class MutualIndependence { independent, dependent, degenerate };

struct MutualIndependenceResult {
  MutualIndependence outcome = MutualIndependence::independent;
  /// Indices into Ys of the first violating (or degenerate) subset; empty when independent.
  std::vector<std::size_t> witness;
};

/// Checks R(X | ∩_{i∈S} Y_i) = R(X) for every nonempty S. A dependent subset takes
/// precedence over a degenerate one since it settles the answer.
inline MutualIndependenceResult is_mutually_r_independent(const Subspace &x, std::span<const Subspace> ys,
                                                          std::size_t cap = 20, const ToleranceConfig &tol = {}) {
  if (ys.size() > cap)
    throw InvalidArgument("mutual independence check over " + std::to_string(ys.size()) +
                          " subspaces exceeds cap " + std::to_string(cap));
  for (const auto &y : ys) detail::require_same_ambient(x, y);

  MutualIndependenceResult result;
  std::optional<std::vector<std::size_t>> degenerate;
  std::vector<std::size_t> chosen;
  const auto rx = x.rank();
  const auto d = x.dim();

  // Depth-first over subsets in lexicographic order carrying the running intersection.
  auto visit = [&](auto &&self, std::size_t next, const Subspace &current) -> bool {
    for (std::size_t i = next; i < ys.size(); ++i) {
      chosen.push_back(i);
      Subspace cond = chosen.size() == 1 ? ys[i] : intersect(current, ys[i], tol);
      if (cond.is_zero()) {
        // Every superset is degenerate as well.
        if (!degenerate) degenerate = chosen;
      } else {
        if (intersect(x, cond, tol).rank() * d != rx * cond.rank()) {
          result.outcome = MutualIndependence::dependent;
          result.witness = chosen;
          return true;
        }
        if (self(self, i + 1, cond)) return true;
      }
      chosen.pop_back();
    }
    return false;
  };
  if (visit(visit, 0, Subspace::full(x.ambient()))) return result;
  if (degenerate) {
    result.outcome = MutualIndependence::degenerate;
    result.witness = *degenerate;
  }
  return result;
}

}  // namespace qlll

#endif  // QLLL_SUBSPACE_HPP
