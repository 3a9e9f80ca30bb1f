#include "rkhs/kernel_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rkhs {

namespace {

std::span<const double> row_span(const RowMatrix& m, Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

void check_kernel_dim(const ScaledKernel& k, const PointSet& x, const char* what) {
  if (x.dim() != k.dim()) {
    throw DimensionError(std::string(what) + ": kernel fitted for dimension " +
                         std::to_string(k.dim()) + ", got " + std::to_string(x.dim()));
  }
}

// Sum over all pairs with a fixed per-row summation order.
double pair_sum(const BaseKernel& base, const RowMatrix& a, const RowMatrix& b) {
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    const auto ai = row_span(a, i);
    for (Index j = 0; j < b.rows(); ++j) row += base(ai, row_span(b, j));
    total += row;
  }
  return total;
}

// Total order on point sets, used to fix the argument order of the cross term.
bool canonical_less(const PointSet& a, const PointSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  if (a.dim() != b.dim()) return a.dim() < b.dim();
  const double* pa = a.matrix().data();
  const double* pb = b.matrix().data();
  const Index n = a.size() * a.dim();
  for (Index i = 0; i < n; ++i) {
    if (pa[i] != pb[i]) return pa[i] < pb[i];
  }
  return false;
}

bool factor_ok(const Eigen::LLT<Matrix>& llt, double max_diag, Index n) {
  if (llt.info() != Eigen::Success) return false;
  const Matrix& l = llt.matrixLLT();
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) min_pivot = std::min(min_pivot, l(i, i) * l(i, i));
  return std::isfinite(min_pivot) &&
         min_pivot > static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;
}

constexpr int kRefinementSteps = 5;

}  // namespace

Matrix gram_mapped(const BaseKernel& base, const RowMatrix& sx, const RowMatrix& sy) {
  if (sx.cols() != sy.cols()) throw DimensionError("gram: feature dimensions differ");
  Matrix out(sx.rows(), sy.rows());
  for (Index i = 0; i < sx.rows(); ++i) {
    const auto xi = row_span(sx, i);
    for (Index j = 0; j < sy.rows(); ++j) out(i, j) = base(xi, row_span(sy, j));
  }
  return out;
}

Matrix gram(const ScaledKernel& k, const PointSet& x, const PointSet& y) {
  require_same_dim(x, y, "gram");
  check_kernel_dim(k, x, "gram");
  return gram_mapped(k.base(), k.map(x), k.map(y));
}

SymmetricSolver::SymmetricSolver(Matrix a) : a_(std::move(a)) {
  const Index n = a_.rows();
  if (n != a_.cols()) throw DimensionError("SymmetricSolver: matrix is not square");
  if (n == 0) throw InvalidArgument("SymmetricSolver: empty matrix");
  if (!a_.allFinite()) throw IllConditionedError("ill-conditioned Gram: non-finite entries");

  const double max_diag = a_.diagonal().cwiseAbs().maxCoeff();
  llt_.compute(a_);
  if (factor_ok(llt_, max_diag, n)) return;

  double scale = a_.trace() / static_cast<double>(n);
  if (!(scale > 0.0)) scale = max_diag > 0.0 ? max_diag : 1.0;
  for (double j = 1e-12 * scale; j <= 1e-6 * scale * (1.0 + 1e-9); j *= 10.0) {
    Matrix shifted = a_;
    shifted.diagonal().array() += j;
    llt_.compute(shifted);
    if (factor_ok(llt_, max_diag + j, n)) {
      jitter_ = j;
      return;
    }
  }
  throw IllConditionedError("ill-conditioned Gram");
}

Matrix SymmetricSolver::solve(const Eigen::Ref<const Matrix>& b) const {
  if (b.rows() != a_.rows()) throw DimensionError("SymmetricSolver: right-hand side row mismatch");
  Matrix x = llt_.solve(b);
  if (jitter_ == 0.0) return x;
  // Iterative refinement against the unshifted matrix.
  double last = (b - a_ * x).norm();
  for (int step = 0; step < kRefinementSteps && last > 0.0; ++step) {
    Matrix candidate = x + llt_.solve(b - a_ * x);
    const double r = (b - a_ * candidate).norm();
    if (!(r < last)) break;
    x = std::move(candidate);
    last = r;
  }
  return x;
}

Regressor::Regressor(ScaledKernel kernel, PointSet support, Matrix theta, double epsilon,
                     FitMode mode, double jitter)
    : kernel_(std::move(kernel)),
      support_(std::move(support)),
      theta_(std::move(theta)),
      epsilon_(epsilon),
      mode_(mode),
      jitter_(jitter) {
  if (theta_.rows() != support_.size()) throw DimensionError("Regressor: theta rows != support size");
  if (support_.dim() != kernel_.dim()) throw DimensionError("Regressor: kernel/support dimension mismatch");
}

Regressor fit(const ScaledKernel& k, const PointSet& x, const PointSet& y,
              const Eigen::Ref<const Matrix>& fx, double epsilon) {
  require_same_dim(x, y, "fit");
  check_kernel_dim(k, x, "fit");
  if (x.empty() || y.empty()) throw InvalidArgument("fit: empty point set");
  if (fx.rows() != x.size()) throw DimensionError("fit: fX rows must match X");
  if (!(epsilon >= 0.0)) throw InvalidArgument("fit: epsilon must be >= 0");

  const bool same = x == y;
  Matrix kxy = gram(k, x, y);
  const Index nx = x.size();
  const Index ny = y.size();

  if (epsilon == 0.0 && same) {
    SymmetricSolver solver(std::move(kxy));
    Matrix theta = solver.solve(fx);
    return Regressor(k, y, std::move(theta), 0.0, FitMode::Extrapolation, solver.jitter());
  }

  if (epsilon > 0.0) {
    if (same) {
      kxy.diagonal().array() += epsilon;
      SymmetricSolver solver(std::move(kxy));
      return Regressor(k, y, solver.solve(fx), epsilon, FitMode::Ridge, solver.jitter());
    }
    if (nx == ny) {
      kxy.diagonal().array() += epsilon;
      Eigen::FullPivLU<Matrix> lu(kxy);
      if (!lu.isInvertible()) throw IllConditionedError("ill-conditioned Gram");
      return Regressor(k, y, lu.solve(fx), epsilon, FitMode::Ridge);
    }
    Matrix normal = kxy.transpose() * kxy;
    normal.diagonal().array() += epsilon;
    SymmetricSolver solver(std::move(normal));
    Matrix rhs = kxy.transpose() * fx;
    return Regressor(k, y, solver.solve(rhs), epsilon, FitMode::Ridge, solver.jitter());
  }

  if (nx == ny) {
    Eigen::FullPivLU<Matrix> lu(kxy);
    if (lu.isInvertible()) return Regressor(k, y, lu.solve(fx), 0.0, FitMode::Square);
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(kxy);
  Matrix theta = cod.solve(fx);
  if (!theta.allFinite()) throw IllConditionedError("ill-conditioned Gram");
  return Regressor(k, y, std::move(theta), 0.0, FitMode::LeastSquares);
}

Regressor fit(const ScaledKernel& k, const PointSet& x, const Eigen::Ref<const Matrix>& fx) {
  return fit(k, x, x, fx, 0.0);
}

Matrix predict(const Regressor& r, const PointSet& z) {
  if (z.dim() != r.input_dim()) throw DimensionError("predict: dimension mismatch");
  return gram(r.kernel(), z, r.support()) * r.theta();
}

Matrix gradient_gram(const ScaledKernel& k, const PointSet& z, const PointSet& y) {
  require_same_dim(z, y, "gradient");
  check_kernel_dim(k, z, "gradient");
  const BaseKernel& base = k.base();
  if (!base.has_gradient()) throw InvalidArgument("gradient unavailable for kernel '" + k.tag() + "'");

  const Index d = z.dim();
  const RowMatrix sz = k.map(z);
  const RowMatrix sy = k.map(y);
  Matrix out(z.size() * d, y.size());
  std::vector<double> jac(static_cast<std::size_t>(d));
  std::vector<double> g(static_cast<std::size_t>(d));
  for (Index i = 0; i < z.size(); ++i) {
    k.map_derivative(z.point(i), jac);
    const auto zi = row_span(sz, i);
    for (Index j = 0; j < y.size(); ++j) {
      base.gradient(zi, row_span(sy, j), g);
      for (Index a = 0; a < d; ++a) {
        out(i * d + a, j) = g[static_cast<std::size_t>(a)] * jac[static_cast<std::size_t>(a)];
      }
    }
  }
  return out;
}

Tensor3 gradient(const Regressor& r, const PointSet& z) {
  const Matrix flat = gradient_gram(r.kernel(), z, r.support()) * r.theta();
  const Index d = z.dim();
  Tensor3 out(z.size(), d, r.output_dim());
  for (Index i = 0; i < z.size(); ++i) {
    for (Index a = 0; a < d; ++a) {
      for (Index f = 0; f < r.output_dim(); ++f) out(i, a, f) = flat(i * d + a, f);
    }
  }
  return out;
}

Tensor3 gradient_operator(const ScaledKernel& k, const PointSet& x, const PointSet& y,
                          const PointSet& z, const Eigen::Ref<const Matrix>& fx, double epsilon) {
  if (!k.base().has_gradient()) throw InvalidArgument("gradient unavailable for kernel '" + k.tag() + "'");
  return gradient(fit(k, x, y, fx, epsilon), z);
}

Matrix laplacian_operator(const ScaledKernel& k, const PointSet& x) {
  const Matrix g = gradient_gram(k, x, x);
  SymmetricSolver solver(gram(k, x, x));
  // A = G K^-1, so A^T = K^-1 G^T.
  const Matrix at = solver.solve(g.transpose());
  Matrix l = -(at * at.transpose());
  return 0.5 * (l + l.transpose());
}

double mmd(const ScaledKernel& k, const PointSet& x, const PointSet& z) {
  require_same_dim(x, z, "mmd");
  check_kernel_dim(k, x, "mmd");
  if (x.empty() || z.empty()) throw InvalidArgument("mmd: empty point set");
  const BaseKernel& base = k.base();
  const RowMatrix sx = k.map(x);
  const RowMatrix sz = k.map(z);
  const double nx = static_cast<double>(x.size());
  const double nz = static_cast<double>(z.size());

  const double xx = pair_sum(base, sx, sx) / (nx * nx);
  const double zz = pair_sum(base, sz, sz) / (nz * nz);
  const double cross = canonical_less(z, x) ? pair_sum(base, sz, sx) : pair_sum(base, sx, sz);
  const double value = xx + zz - 2.0 * cross / (nx * nz);
  return std::max(value, 0.0);
}

Matrix discrepancy_matrix(const ScaledKernel& k, const PointSet& x, const PointSet& z) {
  require_same_dim(x, z, "discrepancy_matrix");
  check_kernel_dim(k, x, "discrepancy_matrix");
  const BaseKernel& base = k.base();
  const RowMatrix sx = k.map(x);
  const RowMatrix sz = k.map(z);
  Vector dx(x.size()), dz(z.size());
  for (Index i = 0; i < x.size(); ++i) dx[i] = base(row_span(sx, i), row_span(sx, i));
  for (Index j = 0; j < z.size(); ++j) dz[j] = base(row_span(sz, j), row_span(sz, j));
  Matrix out(x.size(), z.size());
  for (Index i = 0; i < x.size(); ++i) {
    const auto xi = row_span(sx, i);
    for (Index j = 0; j < z.size(); ++j) {
      out(i, j) = std::max(dx[i] + dz[j] - 2.0 * base(xi, row_span(sz, j)), 0.0);
    }
  }
  return out;
}

double norm_estimate(const Regressor& r, const Eigen::Ref<const Matrix>& fx) {
  if (fx.rows() != r.theta().rows() || fx.cols() != r.theta().cols()) {
    throw DimensionError("norm_estimate: fX shape must match theta");
  }
  return std::max((fx.array() * r.theta().array()).sum(), 0.0);
}

double error_bound(const ScaledKernel& k, const PointSet& z, const PointSet& x, const Regressor& r,
                   const Eigen::Ref<const Matrix>& fx) {
  return std::sqrt(mmd(k, x, z)) * std::sqrt(norm_estimate(r, fx));
}

}  // namespace rkhs
