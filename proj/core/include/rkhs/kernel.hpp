#pragma once

#include "rkhs/common.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rkhs {

/// Translation-invariant kernel acting on already-scaled coordinates.
///
/// Implementations must be stateless (or immutable) so a single instance can be
/// shared across threads and across every ScaledKernel built from it.
class BaseKernel {
 public:
  virtual ~BaseKernel() = default;

  virtual std::string tag() const = 0;

  /// Exponent p of the distance |x - y|_p^p used to fit the S1 scale factor.
  virtual int distance_order() const = 0;

  virtual double operator()(std::span<const double> x, std::span<const double> y) const = 0;

  /// Writes d k(x, y) / d x into `out`. Only called when has_gradient() is true.
  virtual void gradient(std::span<const double> x, std::span<const double> y,
                        std::span<double> out) const;

  virtual bool has_gradient() const { return false; }

  /// True when the gradient is continuous everywhere (descent-friendly).
  virtual bool smooth() const { return false; }
};

/// exp(-|x - y|_2^2)
class GaussianKernel final : public BaseKernel {
 public:
  std::string tag() const override { return "gaussian"; }
  int distance_order() const override { return 2; }
  double operator()(std::span<const double> x, std::span<const double> y) const override;
  void gradient(std::span<const double> x, std::span<const double> y,
                std::span<double> out) const override;
  bool has_gradient() const override { return true; }
  bool smooth() const override { return true; }
};

/// exp(-|x - y|_1). The gradient uses sign(x - y) with sign(0) = 0.
class MaternL1Kernel final : public BaseKernel {
 public:
  std::string tag() const override { return "matern-l1"; }
  int distance_order() const override { return 1; }
  double operator()(std::span<const double> x, std::span<const double> y) const override;
  void gradient(std::span<const double> x, std::span<const double> y,
                std::span<double> out) const override;
  bool has_gradient() const override { return true; }
  bool smooth() const override { return false; }
};

using KernelFactory = std::function<std::shared_ptr<const BaseKernel>()>;

// Process-wide registry of kernel families keyed by tag. "gaussian" and
// "matern-l1" are always present.
void register_kernel(const std::string& tag, KernelFactory factory);
std::shared_ptr<const BaseKernel> make_kernel(const std::string& tag);
std::vector<std::string> registered_kernels();

/// Clamp margin applied before the inverse error function.
inline constexpr double kErfinvMargin = 1e-9;

struct ScalingOptions {
  bool use_erfinv = true;
  /// Above this many (x, y) pairs the scale factor is estimated on strided subsets.
  std::int64_t max_alpha_pairs = 4'000'000;
};

/// Base kernel composed with the scaling map S = S1 o S2 o S3:
///   S3 maps the fitted bounding box to the unit cube (degenerate features go to 0.5),
///   S2 applies erf^-1 componentwise on [delta, 1 - delta] (optional),
///   S1 divides by alpha.
/// Parameters are fixed at construction.
class ScaledKernel {
 public:
  ScaledKernel(std::shared_ptr<const BaseKernel> base, Vector lower, Vector range, double alpha,
               bool use_erfinv);

  /// S = identity: the base kernel on raw coordinates.
  static ScaledKernel unscaled(std::shared_ptr<const BaseKernel> base, Index dim);
  static ScaledKernel unscaled(const std::string& tag, Index dim);

  const BaseKernel& base() const noexcept { return *base_; }
  std::shared_ptr<const BaseKernel> base_ptr() const noexcept { return base_; }
  std::string tag() const { return base_->tag(); }
  Index dim() const noexcept { return lower_.size(); }
  double alpha() const noexcept { return alpha_; }
  bool uses_erfinv() const noexcept { return use_erfinv_; }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& range() const noexcept { return range_; }
  bool is_identity() const noexcept { return identity_; }

  /// S3 only: coordinates in the unit cube.
  RowMatrix to_unit_cube(const PointSet& x) const;
  /// Full map S applied to every row.
  RowMatrix map(const PointSet& x) const;
  void map_point(std::span<const double> x, std::span<double> out) const;
  /// Diagonal of the Jacobian of S at x.
  void map_derivative(std::span<const double> x, std::span<double> out) const;

  double operator()(std::span<const double> x, std::span<const double> y) const;

 private:
  double map_coordinate(Index d, double v) const;

  std::shared_ptr<const BaseKernel> base_;
  Vector lower_;
  Vector range_;
  double alpha_ = 1.0;
  bool use_erfinv_ = true;
  bool identity_ = false;
};

/// Fits S3 on X's bounding box and S1's alpha as the mean |u - v|_p^p over
/// pairs of S3-mapped points of X and Y (p from the family).
ScaledKernel fit_scaling(const PointSet& x, const PointSet& y, const std::string& family,
                         const ScalingOptions& options = {});
ScaledKernel fit_scaling(const PointSet& x, const PointSet& y,
                         std::shared_ptr<const BaseKernel> base,
                         const ScalingOptions& options = {});

}  // namespace rkhs
