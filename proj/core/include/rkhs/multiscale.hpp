#pragma once

#include "rkhs/clustering.hpp"
#include "rkhs/common.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/kernel_ops.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rkhs {

/// Builds the kernel of one cluster from its points.
using LocalKernelFactory = std::function<ScaledKernel(const PointSet& cluster)>;

/// Same family and scaling options as `k0`, scaling refit on the cluster. A cluster
/// whose points all coincide falls back to `k0`.
LocalKernelFactory refit_local_kernel(const ScaledKernel& k0);

enum class CenterMethod { Greedy, Function, KMeans, Random };

CenterMethod parse_center_method(const std::string& tag);

struct MultiscaleOptions {
  CenterMethod centers = CenterMethod::Greedy;
  std::uint64_t seed = 0;
  BalancedAssignOptions balance;
};

/// f(.) = coarse(.) + local_{l(.)}(.), with the local models fitted on the coarse
/// residuals of their own cluster in extrapolation mode.
class MultiscaleRegressor {
 public:
  MultiscaleRegressor(Regressor coarse, std::vector<Regressor> locals, ClusterModel model);

  const Regressor& coarse() const noexcept { return coarse_; }
  const std::vector<Regressor>& locals() const noexcept { return locals_; }
  const ClusterModel& model() const noexcept { return model_; }

 private:
  Regressor coarse_;
  std::vector<Regressor> locals_;
  ClusterModel model_;
};

MultiscaleRegressor fit_multiscale(const ScaledKernel& k0, const LocalKernelFactory& klocal,
                                   const PointSet& x, const Eigen::Ref<const Matrix>& fx, Index n_y,
                                   const MultiscaleOptions& options = {});

/// Fit on a given balanced cluster model.
MultiscaleRegressor fit_multiscale(const ScaledKernel& k0, const LocalKernelFactory& klocal,
                                   const PointSet& x, const Eigen::Ref<const Matrix>& fx,
                                   const ClusterModel& model);

Matrix predict_multiscale(const MultiscaleRegressor& m, const PointSet& z);

// ---------------------------------------------------------------------------
// Multiscale transport

enum class MatchDistance { Euclidean, Discrepancy };

MatchDistance parse_match_distance(const std::string& tag);

struct ClusterMatchOptions {
  MatchDistance distance = MatchDistance::Euclidean;
  /// Kernel used by the discrepancy distance.
  std::optional<ScaledKernel> kernel;
  Index alternations = 2;
  Index kmeans_iterations = 25;
  std::uint64_t seed = 0;
};

struct ClusterMatch {
  PointSet centroids_x, centroids_y;
  Assignment sigma_x, sigma_y;
  IndexList labels_x, labels_y;
  /// X cluster c is matched with Y cluster pairing[c].
  Assignment pairing;
  double objective = 0.0;
};

/// Balanced clusters of X and Y plus a size-preserving bijection between them.
ClusterMatch ot_cluster_match(const PointSet& x, const PointSet& y, Index m,
                              const ClusterMatchOptions& options = {});

struct MultiscaleTransportOptions {
  ClusterMatchOptions match;
  /// Cost of the per-cluster point pairing.
  MatchDistance pairing_cost = MatchDistance::Euclidean;
};

/// Exact transport of X onto Y built cluster by cluster.
class MultiscaleTransport {
 public:
  MultiscaleTransport(ClusterMatch match, ClusterModel model, std::optional<Regressor> coarse,
                      std::vector<Regressor> locals, IndexList target_index);

  const ClusterMatch& match() const noexcept { return match_; }
  const ClusterModel& model() const noexcept { return model_; }
  /// Absent when there is a single cluster.
  const std::optional<Regressor>& coarse() const noexcept { return coarse_; }
  const std::vector<Regressor>& locals() const noexcept { return locals_; }
  /// x^n is paired with y^{target_index[n]}.
  const IndexList& target_index() const noexcept { return target_index_; }

  Matrix operator()(const PointSet& z) const;

 private:
  ClusterMatch match_;
  ClusterModel model_;
  std::optional<Regressor> coarse_;
  std::vector<Regressor> locals_;
  IndexList target_index_;
};

MultiscaleTransport fit_multiscale_transport(const PointSet& x, const PointSet& y, Index m,
                                             const ScaledKernel& k0, const LocalKernelFactory& klocal,
                                             const MultiscaleTransportOptions& options = {});

/// Sum of squared Euclidean distances |x^n - y^{target[n]}|^2.
double pairing_cost(const PointSet& x, const PointSet& y, const IndexList& target);

}  // namespace rkhs
