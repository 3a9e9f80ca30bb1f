#include "rkhs/multiscale.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace rkhs {

namespace {

bool all_rows_equal(const PointSet& p) {
  for (Index i = 1; i < p.size(); ++i) {
    if (p.matrix().row(i) != p.matrix().row(0)) return false;
  }
  return true;
}

Matrix squared_euclidean(const PointSet& a, const PointSet& b) {
  Matrix out(a.size(), b.size());
  for (Index i = 0; i < a.size(); ++i) {
    for (Index j = 0; j < b.size(); ++j) out(i, j) = (a.matrix().row(i) - b.matrix().row(j)).squaredNorm();
  }
  return out;
}

Matrix distance(MatchDistance kind, const std::optional<ScaledKernel>& k, const PointSet& a, const PointSet& b) {
  if (kind == MatchDistance::Euclidean) return squared_euclidean(a, b);
  if (!k) throw InvalidArgument("discrepancy distance requires a kernel");
  return discrepancy_matrix(*k, a, b);
}

std::vector<IndexList> group(const IndexList& labels, Index clusters) {
  std::vector<IndexList> out(static_cast<std::size_t>(clusters));
  for (std::size_t n = 0; n < labels.size(); ++n) {
    out[static_cast<std::size_t>(labels[n])].push_back(static_cast<Index>(n));
  }
  return out;
}

PointSet cluster_means(const PointSet& x, const IndexList& labels, const PointSet& previous) {
  const Index m = previous.size();
  RowMatrix sums = RowMatrix::Zero(m, x.dim());
  std::vector<Index> counts(static_cast<std::size_t>(m), 0);
  for (Index n = 0; n < x.size(); ++n) {
    sums.row(labels[static_cast<std::size_t>(n)]) += x.row(n);
    ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(n)])];
  }
  for (Index c = 0; c < m; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      sums.row(c) = previous.row(c);
    } else {
      sums.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }
  return PointSet(std::move(sums));
}

Index balanced_size(Index n, Index m, Index c) { return n / m + (c < n % m ? 1 : 0); }

}  // namespace

LocalKernelFactory refit_local_kernel(const ScaledKernel& k0) {
  return [k0](const PointSet& cluster) -> ScaledKernel {
    if (cluster.size() <= 1 || all_rows_equal(cluster) || k0.is_identity()) return k0;
    ScalingOptions opts;
    opts.use_erfinv = k0.uses_erfinv();
    return fit_scaling(cluster, cluster, k0.base_ptr(), opts);
  };
}

CenterMethod parse_center_method(const std::string& tag) {
  if (tag == "greedy") return CenterMethod::Greedy;
  if (tag == "function") return CenterMethod::Function;
  if (tag == "kmeans") return CenterMethod::KMeans;
  if (tag == "random") return CenterMethod::Random;
  throw InvalidArgument("unknown clustering method '" + tag + "'");
}

MatchDistance parse_match_distance(const std::string& tag) {
  if (tag == "euclidean") return MatchDistance::Euclidean;
  if (tag == "discrepancy") return MatchDistance::Discrepancy;
  throw InvalidArgument("unknown distance '" + tag + "'");
}

MultiscaleRegressor::MultiscaleRegressor(Regressor coarse, std::vector<Regressor> locals, ClusterModel model)
    : coarse_(std::move(coarse)), locals_(std::move(locals)), model_(std::move(model)) {
  if (static_cast<Index>(locals_.size()) != model_.size()) {
    throw DimensionError("MultiscaleRegressor: one local model per cluster required");
  }
}

MultiscaleRegressor fit_multiscale(const ScaledKernel& k0, const LocalKernelFactory& klocal, const PointSet& x,
                                   const Eigen::Ref<const Matrix>& fx, Index n_y,
                                   const MultiscaleOptions& options) {
  if (n_y < 1 || n_y > x.size()) throw InvalidArgument("fit_multiscale: need 1 <= N_Y <= N_X");
  if (fx.rows() != x.size()) throw DimensionError("fit_multiscale: fX rows must match X");

  PointSet centroids;
  std::optional<IndexList> source;
  switch (options.centers) {
    case CenterMethod::Greedy:
      source = *greedy_discrepancy_clusters(k0, x, n_y).source_indices();
      break;
    case CenterMethod::Function:
      source = *greedy_function_clusters(k0, x, fx, n_y).source_indices();
      break;
    case CenterMethod::KMeans:
      centroids = kmeans_baseline(x, n_y, 50, options.seed).centroids();
      break;
    case CenterMethod::Random: {
      IndexList all(static_cast<std::size_t>(x.size()));
      std::iota(all.begin(), all.end(), Index{0});
      std::mt19937_64 rng(options.seed);
      std::shuffle(all.begin(), all.end(), rng);
      all.resize(static_cast<std::size_t>(n_y));
      source = std::move(all);
      break;
    }
  }
  if (source) centroids = x.select(*source);
  const ClusterModel model = balanced_model(x, centroids, k0, source, options.balance);
  return fit_multiscale(k0, klocal, x, fx, model);
}

MultiscaleRegressor fit_multiscale(const ScaledKernel& k0, const LocalKernelFactory& klocal, const PointSet& x,
                                   const Eigen::Ref<const Matrix>& fx, const ClusterModel& model) {
  if (static_cast<Index>(model.labels().size()) != x.size()) {
    throw DimensionError("fit_multiscale: cluster model is not allocated on X");
  }
  Regressor coarse = fit(k0, x, model.centroids(), fx, 0.0);
  const Matrix residual = fx - predict(coarse, x);

  std::vector<Regressor> locals;
  locals.reserve(static_cast<std::size_t>(model.size()));
  const auto members = model.members();
  for (Index c = 0; c < model.size(); ++c) {
    const IndexList& idx = members[static_cast<std::size_t>(c)];
    if (idx.empty()) throw InvalidArgument("fit_multiscale: empty cluster");
    const PointSet xc = x.select(idx);
    const ScaledKernel kc = klocal ? klocal(xc) : k0;
    locals.push_back(fit(kc, xc, select_rows(residual, idx)));
  }
  return MultiscaleRegressor(std::move(coarse), std::move(locals), model);
}

Matrix predict_multiscale(const MultiscaleRegressor& m, const PointSet& z) {
  Matrix out = predict(m.coarse(), z);
  const IndexList labels = m.model().allocate(z);
  const auto groups = group(labels, m.model().size());
  for (Index c = 0; c < m.model().size(); ++c) {
    const IndexList& idx = groups[static_cast<std::size_t>(c)];
    if (idx.empty()) continue;
    const Matrix local = predict(m.locals()[static_cast<std::size_t>(c)], z.select(idx));
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(idx[i]) += local.row(static_cast<Index>(i));
  }
  return out;
}

ClusterMatch ot_cluster_match(const PointSet& x, const PointSet& y, Index m, const ClusterMatchOptions& options) {
  require_same_dim(x, y, "ot_cluster_match");
  const Index n = x.size();
  if (y.size() != n) throw DimensionError("ot_cluster_match: X and Y must have the same size");
  if (m < 1 || m > n) throw InvalidArgument("ot_cluster_match: need 1 <= M <= N");

  PointSet cx = kmeans_baseline(x, m, options.kmeans_iterations, options.seed).centroids();
  PointSet cy = kmeans_baseline(y, m, options.kmeans_iterations, options.seed).centroids();

  // Pairing restricted to clusters of equal size.
  const auto pair_clusters = [&](const PointSet& a, const PointSet& b) {
    Matrix c = distance(options.distance, options.kernel, a, b);
    const double big = (c.cwiseAbs().maxCoeff() + 1.0) * static_cast<double>(m + 1);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) {
        if (balanced_size(n, m, i) != balanced_size(n, m, j)) c(i, j) = big;
      }
    }
    return std::make_pair(lsap_exact(c), c);
  };

  ClusterMatch best;
  best.objective = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < std::max<Index>(options.alternations, 1); ++a) {
    ClusterMatch cur;
    const Matrix dx = distance(options.distance, options.kernel, cx, x);
    cur.sigma_x = balanced_assign(dx);
    cur.labels_x = balanced_labels(cur.sigma_x, m);
    const Matrix dy = distance(options.distance, options.kernel, cy, y);
    cur.sigma_y = balanced_assign(dy);
    cur.labels_y = balanced_labels(cur.sigma_y, m);

    cx = cluster_means(x, cur.labels_x, cx);
    cy = cluster_means(y, cur.labels_y, cy);
    auto [pairing, cc] = pair_clusters(cx, cy);

    const Matrix ex = distance(options.distance, options.kernel, cx, x);
    const Matrix ey = distance(options.distance, options.kernel, cy, y);
    double obj = 0.0;
    for (Index i = 0; i < n; ++i) {
      obj += ex(cur.labels_x[static_cast<std::size_t>(i)], i) + ey(cur.labels_y[static_cast<std::size_t>(i)], i);
    }
    for (Index c = 0; c < m; ++c) obj += cc(c, pairing[static_cast<std::size_t>(c)]);

    cur.pairing = std::move(pairing);
    cur.centroids_x = cx;
    cur.centroids_y = cy;
    cur.objective = obj;
    if (!(obj < best.objective - 1e-12 * std::abs(best.objective))) {
      if (a == 0) best = std::move(cur);
      break;
    }
    best = std::move(cur);
  }
  return best;
}

MultiscaleTransport::MultiscaleTransport(ClusterMatch match, ClusterModel model, std::optional<Regressor> coarse,
                                         std::vector<Regressor> locals, IndexList target_index)
    : match_(std::move(match)),
      model_(std::move(model)),
      coarse_(std::move(coarse)),
      locals_(std::move(locals)),
      target_index_(std::move(target_index)) {
  if (static_cast<Index>(locals_.size()) != model_.size()) {
    throw DimensionError("MultiscaleTransport: one local map per cluster required");
  }
}

Matrix MultiscaleTransport::operator()(const PointSet& z) const {
  const Index out_dim = locals_.front().output_dim();
  Matrix out = coarse_ ? predict(*coarse_, z) : Matrix::Zero(z.size(), out_dim);
  const auto groups = group(model_.allocate(z), model_.size());
  for (Index c = 0; c < model_.size(); ++c) {
    const IndexList& idx = groups[static_cast<std::size_t>(c)];
    if (idx.empty()) continue;
    const Matrix local = predict(locals_[static_cast<std::size_t>(c)], z.select(idx));
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(idx[i]) += local.row(static_cast<Index>(i));
  }
  return out;
}

MultiscaleTransport fit_multiscale_transport(const PointSet& x, const PointSet& y, Index m, const ScaledKernel& k0,
                                             const LocalKernelFactory& klocal,
                                             const MultiscaleTransportOptions& options) {
  ClusterMatch match = ot_cluster_match(x, y, m, options.match);
  const Index n = x.size();

  ClusterModelParts parts;
  parts.centroids = match.centroids_x;
  parts.rule = AllocationRule::NearestTraining;
  parts.training = x;
  parts.labels = match.labels_x;
  parts.assignment = match.sigma_x;
  ClusterModel model(std::move(parts));

  const auto members_x = group(match.labels_x, m);
  const auto members_y = group(match.labels_y, m);
  IndexList target(static_cast<std::size_t>(n), -1);
  std::vector<ScaledKernel> kernels;
  kernels.reserve(static_cast<std::size_t>(m));
  for (Index c = 0; c < m; ++c) {
    const IndexList& xs = members_x[static_cast<std::size_t>(c)];
    const IndexList& ys = members_y[static_cast<std::size_t>(match.pairing[static_cast<std::size_t>(c)])];
    if (xs.size() != ys.size() || xs.empty()) throw Error("internal: matched clusters differ in size");
    const PointSet xc = x.select(xs);
    const PointSet yc = y.select(ys);
    kernels.push_back(klocal ? klocal(xc) : k0);
    const Matrix cost = options.pairing_cost == MatchDistance::Euclidean
                            ? squared_euclidean(xc, yc)
                            : discrepancy_matrix(kernels.back(), xc, yc);
    const Assignment s = lsap_exact(cost);
    for (std::size_t i = 0; i < xs.size(); ++i) target[static_cast<std::size_t>(xs[i])] = ys[static_cast<std::size_t>(s[i])];
  }

  Matrix paired(n, y.dim());
  for (Index i = 0; i < n; ++i) paired.row(i) = y.row(target[static_cast<std::size_t>(i)]);

  std::optional<Regressor> coarse;
  Matrix residual = paired;
  if (m > 1) {
    coarse = fit(k0, x, match.centroids_x, paired, 0.0);
    residual -= predict(*coarse, x);
  }
  std::vector<Regressor> locals;
  locals.reserve(static_cast<std::size_t>(m));
  for (Index c = 0; c < m; ++c) {
    const IndexList& xs = members_x[static_cast<std::size_t>(c)];
    locals.push_back(fit(kernels[static_cast<std::size_t>(c)], x.select(xs), select_rows(residual, xs)));
  }
  return MultiscaleTransport(std::move(match), std::move(model), std::move(coarse), std::move(locals),
                             std::move(target));
}

double pairing_cost(const PointSet& x, const PointSet& y, const IndexList& target) {
  double total = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    total += (x.matrix().row(i) - y.matrix().row(target[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return total;
}

}  // namespace rkhs
