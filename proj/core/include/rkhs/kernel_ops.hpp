#pragma once

#include "rkhs/common.hpp"
#include "rkhs/kernel.hpp"

#include <vector>

namespace rkhs {

/// Pairwise evaluations K(X, Y) = (k(x^i, y^j))_{ij}, N_X x N_Y.
Matrix gram(const ScaledKernel& k, const PointSet& x, const PointSet& y);

/// Gram matrix on already-mapped coordinates (rows of `sx`, `sy` are S(x), S(y)).
Matrix gram_mapped(const BaseKernel& base, const RowMatrix& sx, const RowMatrix& sy);

/// Factorization of a symmetric positive semidefinite matrix with jitter escalation.
///
/// Tries a plain Cholesky first, then adds 1e-12 * trace / N to the diagonal and
/// multiplies the jitter by 10 until 1e-6 * trace / N. When jitter was needed,
/// solves are followed by a few steps of iterative refinement against the
/// original matrix.
class SymmetricSolver {
 public:
  explicit SymmetricSolver(Matrix a);

  Matrix solve(const Eigen::Ref<const Matrix>& b) const;
  double jitter() const noexcept { return jitter_; }
  Index size() const noexcept { return a_.rows(); }
  const Matrix& matrix() const noexcept { return a_; }

 private:
  Matrix a_;
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

enum class FitMode {
  Extrapolation,  ///< support equals the training points, no regularization
  Square,         ///< square system on a distinct support
  LeastSquares,   ///< rectangular system, minimum-norm least squares
  Ridge,          ///< regularized (epsilon > 0)
};

/// f_{k,theta}(.) = K(., Y) theta.
class Regressor {
 public:
  Regressor(ScaledKernel kernel, PointSet support, Matrix theta, double epsilon, FitMode mode,
            double jitter = 0.0);

  const ScaledKernel& kernel() const noexcept { return kernel_; }
  const PointSet& support() const noexcept { return support_; }
  const Matrix& theta() const noexcept { return theta_; }
  double epsilon() const noexcept { return epsilon_; }
  FitMode mode() const noexcept { return mode_; }
  double jitter() const noexcept { return jitter_; }
  Index input_dim() const noexcept { return support_.dim(); }
  Index output_dim() const noexcept { return theta_.cols(); }

 private:
  ScaledKernel kernel_;
  PointSet support_;
  Matrix theta_;
  double epsilon_ = 0.0;
  FitMode mode_ = FitMode::Extrapolation;
  double jitter_ = 0.0;
};

/// theta = (K(X, Y) + epsilon R)^-1 f(X) with R the identity (ridge).
///
/// Y == X with epsilon == 0 is the extrapolation mode and goes through
/// SymmetricSolver; a rectangular system is solved in the least-squares sense.
Regressor fit(const ScaledKernel& k, const PointSet& x, const PointSet& y,
              const Eigen::Ref<const Matrix>& fx, double epsilon = 0.0);

/// Extrapolation fit (support = x, epsilon = 0).
Regressor fit(const ScaledKernel& k, const PointSet& x, const Eigen::Ref<const Matrix>& fx);

Matrix predict(const Regressor& r, const PointSet& z);

/// Dense N_Z x D x D_f array, (z, d, f) addressing.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Index n0, Index n1, Index n2)
      : n0_(n0), n1_(n1), n2_(n2), data_(static_cast<std::size_t>(n0 * n1 * n2), 0.0) {}

  Index extent(int axis) const noexcept { return axis == 0 ? n0_ : (axis == 1 ? n1_ : n2_); }
  double& operator()(Index i, Index j, Index l) { return data_[offset(i, j, l)]; }
  double operator()(Index i, Index j, Index l) const { return data_[offset(i, j, l)]; }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t offset(Index i, Index j, Index l) const {
    return static_cast<std::size_t>((i * n1_ + j) * n2_ + l);
  }
  Index n0_ = 0, n1_ = 0, n2_ = 0;
  std::vector<double> data_;
};

/// (grad K)(Z, Y) flattened to (N_Z * D) x N_Y; row z * D + d holds d k(z, y^j) / d z_d,
/// chain-ruled through the scaling map.
Matrix gradient_gram(const ScaledKernel& k, const PointSet& z, const PointSet& y);

/// Kernel estimate of grad f at Z: (grad K)(Z, Y) (K(X, Y) + epsilon R)^-1 f(X).
Tensor3 gradient_operator(const ScaledKernel& k, const PointSet& x, const PointSet& y,
                          const PointSet& z, const Eigen::Ref<const Matrix>& fx,
                          double epsilon = 0.0);

/// Gradient of a fitted regressor at Z.
Tensor3 gradient(const Regressor& r, const PointSet& z);

/// Delta_k = -grad_k^T grad_k with grad_k = (grad K)(X, X) K(X, X)^-1. N_X x N_X, symmetric NSD.
Matrix laplacian_operator(const ScaledKernel& k, const PointSet& x);

/// Squared kernel discrepancy d_k(Z, X)^2, clamped at zero. Symmetric in its arguments
/// bit for bit.
double mmd(const ScaledKernel& k, const PointSet& x, const PointSet& z);

/// M_k(X, Z)_{nm} = k(x^n, x^n) + k(z^m, z^m) - 2 k(x^n, z^m), N_X x N_Z.
Matrix discrepancy_matrix(const ScaledKernel& k, const PointSet& x, const PointSet& z);

/// Lower bound <f(X), theta> on the squared RKHS norm of f.
double norm_estimate(const Regressor& r, const Eigen::Ref<const Matrix>& fx);

/// d_k(Z, X) * sqrt(<f(X), theta>).
double error_bound(const ScaledKernel& k, const PointSet& z, const PointSet& x, const Regressor& r,
                   const Eigen::Ref<const Matrix>& fx);

}  // namespace rkhs
