#pragma once

#include "rkhs/common.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/solvers.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace rkhs {

enum class AllocationRule {
  NearestEuclidean,  ///< arg min |z - y|_2
  NearestKernel,     ///< arg min d_k(z, y)
  NearestTraining,   ///< cluster of the nearest training point (balanced models)
};

struct ClusterModelParts {
  PointSet centroids;
  AllocationRule rule = AllocationRule::NearestEuclidean;
  std::optional<ScaledKernel> kernel;
  /// Training points and their clusters; required by NearestTraining.
  PointSet training;
  IndexList labels;
  std::optional<Assignment> assignment;
  std::optional<IndexList> source_indices;
};

/// Centroids plus the allocation function l(.).
class ClusterModel {
 public:
  explicit ClusterModel(ClusterModelParts parts);

  const PointSet& centroids() const noexcept { return parts_.centroids; }
  Index size() const noexcept { return parts_.centroids.size(); }
  AllocationRule rule() const noexcept { return parts_.rule; }
  const std::optional<ScaledKernel>& kernel() const noexcept { return parts_.kernel; }
  const PointSet& training() const noexcept { return parts_.training; }
  /// Cluster of each training point (empty when the model has no training allocation).
  const IndexList& labels() const noexcept { return parts_.labels; }
  const std::optional<Assignment>& assignment() const noexcept { return parts_.assignment; }
  const std::optional<IndexList>& source_indices() const noexcept { return parts_.source_indices; }

  Index allocate(std::span<const double> z) const;
  IndexList allocate(const PointSet& z) const;

  /// Training indices of each cluster, ascending.
  std::vector<IndexList> members() const;

 private:
  ClusterModelParts parts_;
  RowMatrix mapped_centroids_;
};

struct GreedyDiscrepancyOptions {
  /// Points selected per greedy round.
  Index batch = 1;
  /// Keep K(X, X) in memory up to this many points; stream columns above.
  Index full_gram_threshold = 8192;
};

/// Y subset of X chosen greedily to minimize d_k(Y, X)^2.
ClusterModel greedy_discrepancy_clusters(const ScaledKernel& k, const PointSet& x, Index n_y,
                                         const GreedyDiscrepancyOptions& options = {});

struct GreedyFunctionOptions {
  /// Candidates whose Schur complement falls below tol * k(x, x) are skipped.
  double schur_tolerance = 1e-12;
  /// Observer called after every selection with the current indices and K(Y, Y)^-1.
  std::function<void(const IndexList&, const Matrix&)> on_step;
};

/// Greedy selection of the point with largest residual |f(x) - f_{k, theta_Y}(x)|_p.
/// `p` <= 0 selects the max norm.
ClusterModel greedy_function_clusters(const ScaledKernel& k, const PointSet& x,
                                      const Eigen::Ref<const Matrix>& fx, Index n_y, double p = 2.0,
                                      const GreedyFunctionOptions& options = {});

struct SubsetRefineOptions {
  DescentOptions descent = {.sweep = Sweep::Bipartite};
  Index full_gram_threshold = 8192;
  /// Observer called after every accepted swap with the predicted gain and the new subset.
  std::function<void(double gain, const IndexList& subset)> on_swap;
};

/// Swap-based refinement of a subset Y of X against d_k(Y, X)^2.
ClusterModel subset_refine(const ScaledKernel& k, const PointSet& x, const IndexList& initial,
                           const SubsetRefineOptions& options = {});

/// J(Y) = d_k(Y, X)^2 and its gradient with respect to the centroid coordinates.
class DiscrepancyFunctional {
 public:
  DiscrepancyFunctional(ScaledKernel k, PointSet x);

  double value(const Matrix& y) const;
  Matrix gradient(const Matrix& y) const;

 private:
  ScaledKernel k_;
  PointSet x_;
  RowMatrix mapped_x_;
  double xx_ = 0.0;
};

struct SharpDiscrepancyReport {
  Index iterations = 0;
  bool converged = false;
  std::vector<double> objective;
};

/// Free-centroid descent on d_k(Y, X)^2 from Y0 (smooth kernels only).
ClusterModel sharp_discrepancy(const ScaledKernel& k, const PointSet& x, const PointSet& y0,
                               double eps, Index maxiter, SharpDiscrepancyReport* report = nullptr);

struct BalancedAssignOptions {
  /// Sweep cap for the descent (0 = until no improving swap).
  Index max_sweeps = 0;
  /// Up to this size the descent starts from the exact balanced optimum (LSAP).
  Index lsap_init_threshold = 512;
  /// (point, cluster) pairs pinned in place.
  std::vector<std::pair<Index, Index>> anchors;
};

/// Permutation sigma of [0, N_X); point n belongs to cluster sigma(n) mod N_Y.
Assignment balanced_assign(const Eigen::Ref<const Matrix>& d, const BalancedAssignOptions& options = {});

IndexList balanced_labels(const Assignment& sigma, Index n_y);
double balanced_cost(const Eigen::Ref<const Matrix>& d, const Assignment& sigma);

/// Balanced model around the given centroids with cost D = discrepancy (or squared
/// Euclidean when `k` is empty). Centroids listed in `source_indices` stay in their cluster.
ClusterModel balanced_model(const PointSet& x, const PointSet& centroids,
                            const std::optional<ScaledKernel>& k,
                            std::optional<IndexList> source_indices = std::nullopt,
                            const BalancedAssignOptions& options = {});

/// Lloyd's algorithm with k-means++ seeding. `inertia_trace` receives the inertia
/// after every assignment step.
ClusterModel kmeans_baseline(const PointSet& x, Index n_y, Index maxiter, std::uint64_t seed,
                             std::vector<double>* inertia_trace = nullptr);

struct ClusterMetrics {
  double inertia = 0.0;
  double mmd = 0.0;
};

ClusterMetrics metrics(const ClusterModel& model, const PointSet& x, const ScaledKernel& k);

}  // namespace rkhs
