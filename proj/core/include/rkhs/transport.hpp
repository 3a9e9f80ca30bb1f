#pragma once

#include "rkhs/common.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/kernel_ops.hpp"
#include "rkhs/solvers.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace rkhs {

// ---------------------------------------------------------------------------
// Sampling maps

struct SampleMapOptions {
  bool fit_inverse = true;
  /// Pair points by squared Euclidean distance instead of the discrepancy (equal dimensions only).
  bool euclidean_cost = false;
  /// Kernel of the data space for the inverse map; refit on Y when absent.
  std::optional<ScaledKernel> inverse_kernel;
  DescentOptions descent = {};
};

/// Decoder X -> Y o sigma fitted in extrapolation mode, plus the matching encoder.
class SamplerMap {
 public:
  SamplerMap(Regressor forward, std::optional<Regressor> inverse, Assignment sigma);

  const Regressor& forward() const noexcept { return forward_; }
  const std::optional<Regressor>& inverse() const noexcept { return inverse_; }
  /// Latent row i was paired with data row sigma[i].
  const Assignment& sigma() const noexcept { return sigma_; }

 private:
  Regressor forward_;
  std::optional<Regressor> inverse_;
  Assignment sigma_;
};

/// Kernel sampling map from the latent sample X to the data sample Y.
SamplerMap sample_map(const ScaledKernel& k, const PointSet& x, const PointSet& y,
                      const SampleMapOptions& options = {});

/// Decoder evaluated at latent points.
Matrix generate(const SamplerMap& s, const PointSet& z_latent);

/// Encoder evaluated at data points.
Matrix encode(const SamplerMap& s, const PointSet& y);

/// <-Delta_k, (Y o sigma)(Y o sigma)^T>, the squared gradient norm of the fitted map.
double frobenius_objective(const Eigen::Ref<const Matrix>& neg_laplacian, const PointSet& y,
                           const Assignment& sigma);

/// Gain oracle for swaps under the Frobenius objective. Evaluations cost O(D_Y);
/// accepted swaps refresh the cached product in O(N D_Y).
class FrobeniusGain {
 public:
  FrobeniusGain(Matrix neg_laplacian, const PointSet& y, const Assignment& sigma);

  double gain(Index i, Index j, const Assignment& sigma) const;
  void swapped(Index i, Index j, const Assignment& sigma);

 private:
  Matrix l_;
  RowMatrix y_;
  RowMatrix b_;  // L (Y o sigma)
  Vector norms_;
};

/// Standard normal draws, N x D, from a seeded generator.
PointSet standard_normal(Index n, Index d, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Conditional sampling

struct ConditionalOptions {
  /// Latent dimension for the condition; 0 uses the condition itself as latent.
  Index latent_x = 0;
  /// Latent dimension of the noise; negative selects min(D_Y, 8).
  Index latent_y = -1;
  std::uint64_t seed = 0;
  ScalingOptions scaling = {};
};

/// Model of Y | X = x: x -> encoder(x), then the Y-part of the joint decoder at
/// [encoder(x), eta_y].
class ConditionalSampler {
 public:
  ConditionalSampler(std::optional<SamplerMap> encoder, SamplerMap decoder, PointSet latent, Index dim_x,
                     Index dim_y, Index latent_y);

  const std::optional<SamplerMap>& encoder() const noexcept { return encoder_; }
  const SamplerMap& decoder() const noexcept { return decoder_; }
  /// Fit-time latent sample [eta_x, eta_y].
  const PointSet& latent() const noexcept { return latent_; }
  Index latent_y() const noexcept { return latent_y_; }

  /// Joint [X, Y] decoded from latent rows.
  Matrix joint(const PointSet& eta) const;
  /// Latent condition for each row of x.
  Matrix condition_latent(const PointSet& x) const;
  /// Y samples for row-paired conditions and noise draws.
  Matrix sample(const PointSet& x, const PointSet& eta_y) const;
  /// `count` Y samples at the single condition x.
  Matrix sample(std::span<const double> x, Index count, std::uint64_t seed) const;

 private:
  std::optional<SamplerMap> encoder_;
  SamplerMap decoder_;
  PointSet latent_;
  Index dim_x_ = 0;
  Index dim_y_ = 0;
  Index latent_y_ = 0;
};

ConditionalSampler conditional_sampler(const PointSet& x, const PointSet& y,
                                       std::shared_ptr<const BaseKernel> base,
                                       const ConditionalOptions& options = {});

// ---------------------------------------------------------------------------
// Transition matrices

struct BiStochasticMatrix {
  Matrix values;
  Index iterations = 0;
  bool converged = true;
};

/// Max over rows and columns of |sum - 1|.
double bistochastic_deviation(const Eigen::Ref<const Matrix>& p);

/// Alternating row / column normalization of a nonnegative matrix.
BiStochasticMatrix ipf(const Eigen::Ref<const Matrix>& m, double tol = 1e-10, Index maxiter = 10000);

struct NadarayaWatsonOptions {
  /// Entrywise product of the Gram matrices instead of the matrix product.
  bool hadamard = false;
  Index maxiter = 10000;
};

/// IPF(K(X, X) K(Y, Y)).
BiStochasticMatrix transition_nw(const ScaledKernel& k, const PointSet& x, const PointSet& y, double tol = 1e-10,
                                 const NadarayaWatsonOptions& options = {});

struct PiOptions {
  /// Cost of the initial reindexing: discrepancy (default) or squared Euclidean.
  bool euclidean_reindex = false;
};

struct PiResult {
  BiStochasticMatrix pi;
  Assignment sigma;
  /// J(Pi^n) = |X - Pi^n Y^0|^2 on centered data, one entry per iterate.
  std::vector<double> objective;
  /// Max row / column sum deviation of every iterate.
  std::vector<double> constraint_deviation;
};

/// Bistochastic transition estimate as a perturbation of the identity, refined by
/// exact line search on J(Pi) = |X - Pi Y|^2.
PiResult pi_algorithm(const ScaledKernel& k, const PointSet& x, const PointSet& y, double eps, Index maxiter,
                      const PiOptions& options = {});

/// Pi g(Y).
Matrix conditional_expectation(const BiStochasticMatrix& p, const Eigen::Ref<const Matrix>& gy);

}  // namespace rkhs
