#ifndef DSSE_LINALG_HPP_
#define DSSE_LINALG_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "dsse/errors.hpp"

namespace dsse {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using DenseMatrix = Matrix<double>;
using DenseVector = Vector<double>;

namespace linalg {

// A pivot smaller than this fraction of the largest entry marks the matrix
// singular.
inline constexpr double kPivotThreshold = 1e-14;

// Relative symmetry tolerance accepted for KKT Hessian blocks.
inline constexpr double kSymmetryTolerance = 1e-12;

template <typename Derived>
typename Derived::Scalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return m.size() == 0 ? Scalar(0) : m.cwiseAbs().maxCoeff();
}

// LU with partial pivoting plus one step of iterative refinement. Handles
// indefinite matrices, which is what KKT systems are. Dense O(n^3); the
// region blocks this library factors are at most a few hundred rows.
template <typename Scalar>
class PivotedLu {
 public:
  PivotedLu() = default;

  explicit PivotedLu(Matrix<Scalar> a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) {
      throw DimensionMismatch("solve_linear: matrix is " +
                              std::to_string(a_.rows()) + "x" +
                              std::to_string(a_.cols()) + ", expected square");
    }
    if (!a_.allFinite()) {
      throw SingularMatrix("solve_linear: matrix has non-finite entries");
    }
    if (a_.rows() == 0) return;
    lu_.compute(a_);
    const Scalar largest = max_abs(a_);
    const Scalar smallest_pivot = lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(largest > Scalar(0)) ||
        smallest_pivot < Scalar(kPivotThreshold) * largest) {
      throw SingularMatrix("solve_linear: pivot " + std::to_string(double(smallest_pivot)) +
                           " below threshold relative to max entry " +
                           std::to_string(double(largest)));
    }
  }

  Index size() const { return a_.rows(); }
  const Matrix<Scalar>& matrix() const { return a_; }

  template <typename Rhs>
  Matrix<Scalar> solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    if (rhs.rows() != a_.rows()) {
      throw DimensionMismatch("solve_linear: rhs has " + std::to_string(rhs.rows()) +
                              " rows, matrix has " + std::to_string(a_.rows()));
    }
    if (a_.rows() == 0) return Matrix<Scalar>(0, rhs.cols());
    Matrix<Scalar> x = lu_.solve(rhs);
    const Matrix<Scalar> r = rhs - a_ * x;
    x += lu_.solve(r);
    return x;
  }

 private:
  Matrix<Scalar> a_;
  Eigen::PartialPivLU<Matrix<Scalar>> lu_;
};

template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> solve_linear(const Eigen::MatrixBase<DerivedA>& a,
                                               const Eigen::MatrixBase<DerivedB>& rhs) {
  using Scalar = typename DerivedA::Scalar;
  if (a.rows() != a.cols() || rhs.rows() != a.rows() || rhs.cols() != 1) {
    throw DimensionMismatch("solve_linear: non-conforming dimensions");
  }
  PivotedLu<Scalar> lu{Matrix<Scalar>(a)};
  return lu.solve(rhs);
}

// Equality-constrained quadratic model
//   min 1/2 dx' H dx + gradient' dx   s.t.  J dx + constraint_residual = 0.
template <typename Scalar>
struct KktSystem {
  Matrix<Scalar> hessian;
  Matrix<Scalar> constraints;
  Vector<Scalar> gradient;
  Vector<Scalar> constraint_residual;
};

template <typename Scalar>
struct KktSolution {
  Vector<Scalar> primal_step;
  Vector<Scalar> multipliers;
  bool regularized = false;
};

// Factorization of the bordered matrix [H J'; J 0]. The matrix is
// equilibrated with a symmetric power-of-two diagonal scaling first, so
// Hessian blocks of order 1e9 and constraint blocks of order 1 factor
// without losing the constraint pivots. If the plain factorization is
// singular, a ridge 1e-9 (1 + max diag H) is added to H once and
// regularized() reports it.
template <typename Scalar>
class KktFactorization {
 public:
  KktFactorization(const Matrix<Scalar>& hessian, const Matrix<Scalar>& constraints)
      : n_(hessian.rows()), m_(constraints.rows()) {
    if (hessian.rows() != hessian.cols()) {
      throw DimensionMismatch("solve_kkt: Hessian block is not square");
    }
    if (m_ > 0 && constraints.cols() != n_) {
      throw DimensionMismatch("solve_kkt: constraint block has " +
                              std::to_string(constraints.cols()) + " columns, Hessian has " +
                              std::to_string(n_));
    }
    const Scalar scale = max_abs(hessian);
    if (max_abs(Matrix<Scalar>(hessian - hessian.transpose())) >
        Scalar(kSymmetryTolerance) * std::max(scale, Scalar(1))) {
      throw ValidationError("solve_kkt: Hessian block is not symmetric");
    }

    Matrix<Scalar> bordered = Matrix<Scalar>::Zero(n_ + m_, n_ + m_);
    bordered.topLeftCorner(n_, n_) = hessian;
    if (m_ > 0) {
      bordered.topRightCorner(n_, m_) = constraints.transpose();
      bordered.bottomLeftCorner(m_, n_) = constraints;
    }
    try {
      factorize(bordered);
    } catch (const SingularMatrix&) {
      const Scalar diag = n_ > 0 ? hessian.diagonal().cwiseAbs().maxCoeff() : Scalar(0);
      const Scalar ridge = Scalar(1e-9) * (Scalar(1) + diag);
      bordered.topLeftCorner(n_, n_).diagonal().array() += ridge;
      regularized_ = true;
      try {
        factorize(bordered);
      } catch (const SingularMatrix& e) {
        throw SingularKkt(std::string("KKT matrix singular even after ridge: ") + e.what());
      }
    }
  }

  bool regularized() const { return regularized_; }
  Index primal_size() const { return n_; }
  Index constraint_size() const { return m_; }

  // Solves the bordered system for an arbitrary stacked right-hand side.
  template <typename Rhs>
  Matrix<Scalar> solve_bordered(const Eigen::MatrixBase<Rhs>& rhs) const {
    const Matrix<Scalar> scaled = scaling_.asDiagonal() * rhs;
    return scaling_.asDiagonal() * lu_.solve(scaled);
  }

  KktSolution<Scalar> solve(const Vector<Scalar>& gradient,
                            const Vector<Scalar>& constraint_residual) const {
    if (gradient.size() != n_ || constraint_residual.size() != m_) {
      throw DimensionMismatch("solve_kkt: right-hand side does not conform");
    }
    Vector<Scalar> rhs(n_ + m_);
    rhs << -gradient, -constraint_residual;
    const Vector<Scalar> x = solve_bordered(rhs);
    return {x.head(n_), x.tail(m_), regularized_};
  }

 private:
  void factorize(const Matrix<Scalar>& bordered) {
    const Index dim = bordered.rows();
    scaling_ = Vector<Scalar>::Ones(dim);
    Matrix<Scalar> scaled = bordered;
    for (int pass = 0; pass < 8; ++pass) {
      for (Index i = 0; i < dim; ++i) {
        const Scalar row_max = scaled.row(i).cwiseAbs().maxCoeff();
        if (row_max > Scalar(0)) {
          using std::exp2, std::log2, std::round, std::sqrt;
          scaling_(i) *= exp2(round(log2(Scalar(1) / sqrt(row_max))));
        }
      }
      scaled = scaling_.asDiagonal() * bordered * scaling_.asDiagonal();
    }
    lu_ = PivotedLu<Scalar>(scaled);
  }

  Index n_;
  Index m_;
  bool regularized_ = false;
  Vector<Scalar> scaling_;
  PivotedLu<Scalar> lu_;
};

template <typename Scalar>
KktSolution<Scalar> solve_kkt(const KktSystem<Scalar>& sys) {
  if (sys.gradient.size() != sys.hessian.rows() ||
      sys.constraint_residual.size() != sys.constraints.rows()) {
    throw DimensionMismatch("solve_kkt: vectors do not conform to blocks");
  }
  KktFactorization<Scalar> kkt(sys.hessian, sys.constraints);
  return kkt.solve(sys.gradient, sys.constraint_residual);
}

}  // namespace linalg
}  // namespace dsse

#endif  // DSSE_LINALG_HPP_
