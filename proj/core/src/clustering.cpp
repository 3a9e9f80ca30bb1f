#include "rkhs/clustering.hpp"

#include "rkhs/kernel_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace rkhs {

namespace {

std::span<const double> row_span(const RowMatrix& m, Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double t = a[d] - b[d];
    s += t * t;
  }
  return s;
}

Vector self_kernel(const BaseKernel& base, const RowMatrix& s) {
  Vector out(s.rows());
  for (Index i = 0; i < s.rows(); ++i) out[i] = base(row_span(s, i), row_span(s, i));
  return out;
}

// Sum of K(X, X) columns, row order fixed.
Vector column_sums(const BaseKernel& base, const RowMatrix& s, const Matrix* full) {
  const Index n = s.rows();
  Vector c = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) c[j] += full ? (*full)(i, j) : base(row_span(s, i), row_span(s, j));
  }
  return c;
}

ClusterModel with_training_labels(ClusterModelParts parts, const PointSet& x) {
  ClusterModel model(parts);
  parts.labels = model.allocate(x);
  parts.training = x;
  return ClusterModel(std::move(parts));
}

}  // namespace

ClusterModel::ClusterModel(ClusterModelParts parts) : parts_(std::move(parts)) {
  if (parts_.centroids.empty()) throw InvalidArgument("ClusterModel: no centroids");
  const Index ny = parts_.centroids.size();
  if (parts_.rule == AllocationRule::NearestKernel) {
    if (!parts_.kernel) throw InvalidArgument("ClusterModel: kernel allocation without a kernel");
    mapped_centroids_ = parts_.kernel->map(parts_.centroids);
  }
  if (!parts_.labels.empty() && static_cast<Index>(parts_.labels.size()) != parts_.training.size()) {
    throw DimensionError("ClusterModel: labels do not match training points");
  }
  for (Index l : parts_.labels) {
    if (l < 0 || l >= ny) throw InvalidArgument("ClusterModel: label out of range");
  }
  if (parts_.rule == AllocationRule::NearestTraining && parts_.labels.empty()) {
    throw InvalidArgument("ClusterModel: training allocation needs labelled training points");
  }
  if (!parts_.training.empty()) require_same_dim(parts_.training, parts_.centroids, "ClusterModel");
}

Index ClusterModel::allocate(std::span<const double> z) const {
  if (static_cast<Index>(z.size()) != parts_.centroids.dim()) throw DimensionError("allocate: dimension mismatch");
  const auto& c = parts_.centroids;
  Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  switch (parts_.rule) {
    case AllocationRule::NearestEuclidean:
      for (Index i = 0; i < c.size(); ++i) {
        const double d = squared_distance(z, c.point(i));
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      return best;
    case AllocationRule::NearestKernel: {
      const auto& k = *parts_.kernel;
      std::vector<double> sz(z.size());
      k.map_point(z, sz);
      const double kzz = k.base()(sz, sz);
      for (Index i = 0; i < c.size(); ++i) {
        const auto yi = row_span(mapped_centroids_, i);
        const double d = kzz + k.base()(yi, yi) - 2.0 * k.base()(sz, yi);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      return best;
    }
    case AllocationRule::NearestTraining: {
      const auto& t = parts_.training;
      Index nearest = 0;
      for (Index i = 0; i < t.size(); ++i) {
        const double d = squared_distance(z, t.point(i));
        if (d < best_d) {
          best_d = d;
          nearest = i;
        }
      }
      return parts_.labels[static_cast<std::size_t>(nearest)];
    }
  }
  return best;
}

IndexList ClusterModel::allocate(const PointSet& z) const {
  IndexList out(static_cast<std::size_t>(z.size()));
  for (Index i = 0; i < z.size(); ++i) out[static_cast<std::size_t>(i)] = allocate(z.point(i));
  return out;
}

std::vector<IndexList> ClusterModel::members() const {
  std::vector<IndexList> out(static_cast<std::size_t>(size()));
  for (std::size_t n = 0; n < parts_.labels.size(); ++n) {
    out[static_cast<std::size_t>(parts_.labels[n])].push_back(static_cast<Index>(n));
  }
  return out;
}

ClusterModel greedy_discrepancy_clusters(const ScaledKernel& k, const PointSet& x, Index n_y,
                                         const GreedyDiscrepancyOptions& options) {
  const Index n = x.size();
  if (n_y < 1 || n_y > n) throw InvalidArgument("greedy_discrepancy_clusters: need 1 <= N_Y <= N_X");
  const BaseKernel& base = k.base();
  const RowMatrix sx = k.map(x);
  const Vector diag = self_kernel(base, sx);

  const bool full = n <= options.full_gram_threshold;
  Matrix kxx;
  if (full) kxx = gram_mapped(base, sx, sx);
  const Vector c = column_sums(base, sx, full ? &kxx : nullptr);

  Vector s = Vector::Zero(n);
  std::size_t incorporated = 0;
  const double nx = static_cast<double>(n);

  auto score = [&](const IndexList& selected, std::span<double> out) {
    for (; incorporated < selected.size(); ++incorporated) {
      const Index m = selected[incorporated];
      if (full) {
        s += kxx.col(m);
      } else {
        const auto ym = row_span(sx, m);
        for (Index i = 0; i < n; ++i) s[i] += base(row_span(sx, i), ym);
      }
    }
    const double np1 = static_cast<double>(selected.size()) + 1.0;
    // Negated MMD increment of Y u {x}.
    for (Index i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          -((2.0 * s[i] + diag[i]) / (np1 * np1) - 2.0 * c[i] / (np1 * nx));
    }
  };

  IndexList idx = greedy_search(n, score, n_y, options.batch);
  ClusterModelParts parts;
  parts.centroids = x.select(idx);
  parts.rule = AllocationRule::NearestKernel;
  parts.kernel = k;
  parts.source_indices = std::move(idx);
  return with_training_labels(std::move(parts), x);
}

ClusterModel greedy_function_clusters(const ScaledKernel& k, const PointSet& x,
                                      const Eigen::Ref<const Matrix>& fx, Index n_y, double p,
                                      const GreedyFunctionOptions& options) {
  const Index n = x.size();
  if (n_y < 1 || n_y > n) throw InvalidArgument("greedy_function_clusters: need 1 <= N_Y <= N_X");
  if (fx.rows() != n) throw DimensionError("greedy_function_clusters: fX rows must match X");
  const BaseKernel& base = k.base();
  const RowMatrix sx = k.map(x);
  const Vector diag = self_kernel(base, sx);

  Matrix kxy(n, n_y);
  Matrix kinv(0, 0);
  Matrix pred = Matrix::Zero(n, fx.cols());
  Vector power = diag;
  IndexList chosen;
  chosen.reserve(static_cast<std::size_t>(n_y));

  auto incorporate = [&](Index m) {
    const Index cnt = static_cast<Index>(chosen.size());
    Vector col(n);
    const auto ym = row_span(sx, m);
    for (Index i = 0; i < n; ++i) col[i] = base(row_span(sx, i), ym);

    Vector w(cnt);
    for (Index a = 0; a < cnt; ++a) w[a] = col[chosen[static_cast<std::size_t>(a)]];
    w = kinv * w;
    double schur = diag[m];
    for (Index a = 0; a < cnt; ++a) schur -= col[chosen[static_cast<std::size_t>(a)]] * w[a];
    if (!(schur > options.schur_tolerance * diag[m])) {
      throw IllConditionedError("greedy_function_clusters: no candidate keeps K(Y, Y) positive definite");
    }

    // Newton basis direction k(., y) - K(., Y) w.
    const Vector v = col - kxy.leftCols(cnt) * w;
    const Eigen::RowVectorXd r = fx.row(m) - pred.row(m);
    pred += v * (r / schur);
    power -= v.cwiseAbs2() / schur;

    Matrix next(cnt + 1, cnt + 1);
    next.topLeftCorner(cnt, cnt) = kinv + (w * w.transpose()) / schur;
    next.topRightCorner(cnt, 1) = -w / schur;
    next.bottomLeftCorner(1, cnt) = -w.transpose() / schur;
    next(cnt, cnt) = 1.0 / schur;
    kinv = std::move(next);

    kxy.col(cnt) = col;
    chosen.push_back(m);
    if (options.on_step) options.on_step(chosen, kinv);
  };

  auto score = [&](const IndexList& selected, std::span<double> out) {
    for (std::size_t a = chosen.size(); a < selected.size(); ++a) incorporate(selected[a]);
    const double ninf = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (!(power[i] > options.schur_tolerance * diag[i])) {
        out[static_cast<std::size_t>(i)] = ninf;
        continue;
      }
      const auto r = (fx.row(i) - pred.row(i)).array().abs();
      out[static_cast<std::size_t>(i)] = p <= 0.0 ? r.maxCoeff() : std::pow(r.pow(p).sum(), 1.0 / p);
    }
  };

  IndexList idx = greedy_search(n, score, n_y, 1);
  for (std::size_t a = chosen.size(); a < idx.size(); ++a) incorporate(idx[a]);

  ClusterModelParts parts;
  parts.centroids = x.select(idx);
  parts.rule = AllocationRule::NearestKernel;
  parts.kernel = k;
  parts.source_indices = std::move(idx);
  return with_training_labels(std::move(parts), x);
}

ClusterModel subset_refine(const ScaledKernel& k, const PointSet& x, const IndexList& initial,
                           const SubsetRefineOptions& options) {
  const Index n = x.size();
  const auto n_y = static_cast<Index>(initial.size());
  if (n_y < 1 || n_y > n) throw InvalidArgument("subset_refine: need 1 <= N_Y <= N_X");

  std::vector<char> in(static_cast<std::size_t>(n), 0);
  Assignment sigma;
  sigma.reserve(static_cast<std::size_t>(n));
  for (Index i : initial) {
    if (i < 0 || i >= n || in[static_cast<std::size_t>(i)]) {
      throw InvalidArgument("subset_refine: initial indices must be valid and distinct");
    }
    in[static_cast<std::size_t>(i)] = 1;
    sigma.push_back(i);
  }
  for (Index i = 0; i < n; ++i) {
    if (!in[static_cast<std::size_t>(i)]) sigma.push_back(i);
  }

  const BaseKernel& base = k.base();
  const RowMatrix sx = k.map(x);
  const Vector diag = self_kernel(base, sx);
  const bool full = n <= options.full_gram_threshold;
  Matrix kxx;
  if (full) kxx = gram_mapped(base, sx, sx);
  const Vector c = column_sums(base, sx, full ? &kxx : nullptr);
  auto kval = [&](Index a, Index b) { return full ? kxx(a, b) : base(row_span(sx, a), row_span(sx, b)); };

  // s(x) = sum_m k(x, y^m) over the current subset.
  Vector s = Vector::Zero(n);
  for (Index m = 0; m < n_y; ++m) {
    const Index ym = sigma[static_cast<std::size_t>(m)];
    for (Index i = 0; i < n; ++i) s[i] += kval(i, ym);
  }

  const double ny2 = static_cast<double>(n_y) * static_cast<double>(n_y);
  const double nynx = static_cast<double>(n_y) * static_cast<double>(n);

  GainOracle oracle;
  oracle.i_begin = 0;
  oracle.i_end = n_y;
  oracle.j_begin = n_y;
  oracle.j_end = n;
  oracle.gain = [&](Index i, Index j, const Assignment& sg) {
    const Index a = sg[static_cast<std::size_t>(i)];
    const Index b = sg[static_cast<std::size_t>(j)];
    const double ds = -2.0 * s[a] + diag[a] + 2.0 * s[b] - 2.0 * kval(a, b) + diag[b];
    const double dc = c[b] - c[a];
    return -(ds / ny2 - 2.0 * dc / nynx);
  };
  IndexList subset(initial);
  oracle.on_swap = [&](Index i, Index j, double gain, const Assignment& sg) {
    const Index b = sg[static_cast<std::size_t>(i)];  // entered
    const Index a = sg[static_cast<std::size_t>(j)];  // left
    for (Index t = 0; t < n; ++t) s[t] += kval(t, b) - kval(t, a);
    if (options.on_swap) {
      std::copy(sg.begin(), sg.begin() + n_y, subset.begin());
      options.on_swap(gain, subset);
    }
  };
  oracle.cost = [&](const Assignment& sg) {
    const IndexList sel(sg.begin(), sg.begin() + n_y);
    return mmd(k, x.select(sel), x);
  };

  const DescentResult res = permutation_descent(oracle, std::move(sigma), options.descent);
  IndexList idx(res.sigma.begin(), res.sigma.begin() + n_y);

  ClusterModelParts parts;
  parts.centroids = x.select(idx);
  parts.rule = AllocationRule::NearestKernel;
  parts.kernel = k;
  parts.source_indices = std::move(idx);
  return with_training_labels(std::move(parts), x);
}

DiscrepancyFunctional::DiscrepancyFunctional(ScaledKernel k, PointSet x)
    : k_(std::move(k)), x_(std::move(x)), mapped_x_(k_.map(x_)) {
  const double n = static_cast<double>(x_.size());
  double total = 0.0;
  for (Index i = 0; i < mapped_x_.rows(); ++i) {
    double row = 0.0;
    for (Index j = 0; j < mapped_x_.rows(); ++j) row += k_.base()(row_span(mapped_x_, i), row_span(mapped_x_, j));
    total += row;
  }
  xx_ = total / (n * n);
}

double DiscrepancyFunctional::value(const Matrix& y) const {
  const RowMatrix sy = k_.map(PointSet::from(y));
  const BaseKernel& base = k_.base();
  const double ny = static_cast<double>(sy.rows());
  const double nx = static_cast<double>(mapped_x_.rows());
  double yy = 0.0, cross = 0.0;
  for (Index m = 0; m < sy.rows(); ++m) {
    const auto ym = row_span(sy, m);
    double row = 0.0;
    for (Index l = 0; l < sy.rows(); ++l) row += base(ym, row_span(sy, l));
    yy += row;
    row = 0.0;
    for (Index i = 0; i < mapped_x_.rows(); ++i) row += base(ym, row_span(mapped_x_, i));
    cross += row;
  }
  return xx_ + yy / (ny * ny) - 2.0 * cross / (ny * nx);
}

Matrix DiscrepancyFunctional::gradient(const Matrix& y) const {
  const PointSet py = PointSet::from(y);
  const RowMatrix sy = k_.map(py);
  const BaseKernel& base = k_.base();
  const Index d = y.cols();
  const double ny = static_cast<double>(sy.rows());
  const double nx = static_cast<double>(mapped_x_.rows());
  Matrix out(y.rows(), d);
  std::vector<double> g(static_cast<std::size_t>(d)), jac(static_cast<std::size_t>(d));
  Vector acc_y(d), acc_x(d);
  for (Index m = 0; m < sy.rows(); ++m) {
    const auto ym = row_span(sy, m);
    acc_y.setZero();
    acc_x.setZero();
    for (Index l = 0; l < sy.rows(); ++l) {
      base.gradient(ym, row_span(sy, l), g);
      for (Index a = 0; a < d; ++a) acc_y[a] += g[static_cast<std::size_t>(a)];
    }
    for (Index i = 0; i < mapped_x_.rows(); ++i) {
      base.gradient(ym, row_span(mapped_x_, i), g);
      for (Index a = 0; a < d; ++a) acc_x[a] += g[static_cast<std::size_t>(a)];
    }
    k_.map_derivative(py.point(m), jac);
    for (Index a = 0; a < d; ++a) {
      out(m, a) = (2.0 * acc_y[a] / (ny * ny) - 2.0 * acc_x[a] / (ny * nx)) * jac[static_cast<std::size_t>(a)];
    }
  }
  return out;
}

ClusterModel sharp_discrepancy(const ScaledKernel& k, const PointSet& x, const PointSet& y0, double eps,
                               Index maxiter, SharpDiscrepancyReport* report) {
  if (!k.base().smooth() || !k.base().has_gradient()) {
    throw InvalidArgument("concave discrepancy; use combinatorial clustering");
  }
  require_same_dim(x, y0, "sharp_discrepancy");
  const DiscrepancyFunctional j(k, x);
  const ExplicitDescentResult res = explicit_descent(
      [&](const Matrix& y) { return j.value(y); }, [&](const Matrix& y) { return j.gradient(y); },
      Matrix(y0.matrix()), eps, maxiter);
  if (report) {
    report->iterations = res.iterations;
    report->converged = res.converged;
    report->objective = res.objective;
  }
  ClusterModelParts parts;
  parts.centroids = PointSet::from(res.x);
  parts.rule = AllocationRule::NearestKernel;
  parts.kernel = k;
  return with_training_labels(std::move(parts), x);
}

IndexList balanced_labels(const Assignment& sigma, Index n_y) {
  IndexList out(sigma.size());
  for (std::size_t n = 0; n < sigma.size(); ++n) out[n] = sigma[n] % n_y;
  return out;
}

double balanced_cost(const Eigen::Ref<const Matrix>& d, const Assignment& sigma) {
  if (static_cast<Index>(sigma.size()) != d.cols()) throw DimensionError("balanced_cost: size mismatch");
  double total = 0.0;
  for (Index n = 0; n < d.cols(); ++n) total += d(sigma[static_cast<std::size_t>(n)] % d.rows(), n);
  return total;
}

Assignment balanced_assign(const Eigen::Ref<const Matrix>& d, const BalancedAssignOptions& options) {
  const Index ny = d.rows();
  const Index nx = d.cols();
  if (ny < 1 || ny > nx) throw InvalidArgument("balanced_assign: need 1 <= N_Y <= N_X");
  if (!d.allFinite()) throw InvalidArgument("balanced_assign: non-finite distance");

  std::vector<Index> pin(static_cast<std::size_t>(nx), -1);
  std::vector<Index> pinned_per_cluster(static_cast<std::size_t>(ny), 0);
  for (const auto& [point, cluster] : options.anchors) {
    if (point < 0 || point >= nx || cluster < 0 || cluster >= ny) {
      throw InvalidArgument("balanced_assign: anchor out of range");
    }
    if (pin[static_cast<std::size_t>(point)] >= 0 && pin[static_cast<std::size_t>(point)] != cluster) {
      throw InvalidArgument("balanced_assign: point anchored to two clusters");
    }
    if (pin[static_cast<std::size_t>(point)] < 0) ++pinned_per_cluster[static_cast<std::size_t>(cluster)];
    pin[static_cast<std::size_t>(point)] = cluster;
  }
  for (Index c = 0; c < ny; ++c) {
    const Index capacity = nx / ny + (c < nx % ny ? 1 : 0);
    if (pinned_per_cluster[static_cast<std::size_t>(c)] > capacity) {
      throw InvalidArgument("balanced_assign: more anchors than cluster capacity");
    }
  }

  Assignment sigma;
  if (nx <= options.lsap_init_threshold) {
    const double big = (d.cwiseAbs().maxCoeff() + 1.0) * static_cast<double>(nx + 1);
    Matrix c(nx, nx);
    for (Index n = 0; n < nx; ++n) {
      const Index p = pin[static_cast<std::size_t>(n)];
      for (Index slot = 0; slot < nx; ++slot) {
        const Index cl = slot % ny;
        c(n, slot) = p >= 0 ? (cl == p ? 0.0 : big) : d(cl, n);
      }
    }
    sigma = lsap_exact(c);
  } else {
    // Identity, with anchored points moved into slots of their cluster.
    sigma.assign(static_cast<std::size_t>(nx), -1);
    std::vector<char> used(static_cast<std::size_t>(nx), 0);
    std::vector<Index> next_slot(static_cast<std::size_t>(ny));
    for (Index c = 0; c < ny; ++c) next_slot[static_cast<std::size_t>(c)] = c;
    for (Index n = 0; n < nx; ++n) {
      const Index p = pin[static_cast<std::size_t>(n)];
      if (p < 0) continue;
      Index& slot = next_slot[static_cast<std::size_t>(p)];
      sigma[static_cast<std::size_t>(n)] = slot;
      used[static_cast<std::size_t>(slot)] = 1;
      slot += ny;
    }
    Index free_slot = 0;
    for (Index n = 0; n < nx; ++n) {
      if (sigma[static_cast<std::size_t>(n)] >= 0) continue;
      const Index preferred = n;
      if (!used[static_cast<std::size_t>(preferred)]) {
        sigma[static_cast<std::size_t>(n)] = preferred;
        used[static_cast<std::size_t>(preferred)] = 1;
      }
    }
    for (Index n = 0; n < nx; ++n) {
      if (sigma[static_cast<std::size_t>(n)] >= 0) continue;
      while (used[static_cast<std::size_t>(free_slot)]) ++free_slot;
      sigma[static_cast<std::size_t>(n)] = free_slot;
      used[static_cast<std::size_t>(free_slot)] = 1;
    }
  }

  GainOracle oracle;
  oracle.gain = [&](Index i, Index j, const Assignment& sg) {
    if (pin[static_cast<std::size_t>(i)] >= 0 || pin[static_cast<std::size_t>(j)] >= 0) return 0.0;
    const Index ci = sg[static_cast<std::size_t>(i)] % ny;
    const Index cj = sg[static_cast<std::size_t>(j)] % ny;
    if (ci == cj) return 0.0;
    return d(ci, i) + d(cj, j) - d(cj, i) - d(ci, j);
  };
  oracle.cost = [&](const Assignment& sg) { return balanced_cost(d, sg); };
  DescentOptions descent;
  descent.sweep = Sweep::Full;
  descent.max_sweeps = options.max_sweeps;
  return permutation_descent(oracle, std::move(sigma), descent).sigma;
}

ClusterModel balanced_model(const PointSet& x, const PointSet& centroids, const std::optional<ScaledKernel>& k,
                            std::optional<IndexList> source_indices, const BalancedAssignOptions& options) {
  require_same_dim(x, centroids, "balanced_model");
  const Index ny = centroids.size();
  Matrix d;
  if (k) {
    d = discrepancy_matrix(*k, centroids, x);
  } else {
    d.resize(ny, x.size());
    for (Index i = 0; i < ny; ++i) {
      for (Index n = 0; n < x.size(); ++n) d(i, n) = squared_distance(centroids.point(i), x.point(n));
    }
  }
  BalancedAssignOptions opts = options;
  if (source_indices) {
    if (static_cast<Index>(source_indices->size()) != ny) {
      throw DimensionError("balanced_model: source indices do not match centroids");
    }
    for (Index i = 0; i < ny; ++i) opts.anchors.emplace_back((*source_indices)[static_cast<std::size_t>(i)], i);
  }
  Assignment sigma = balanced_assign(d, opts);

  ClusterModelParts parts;
  parts.centroids = centroids;
  parts.rule = AllocationRule::NearestTraining;
  parts.kernel = k;
  parts.training = x;
  parts.labels = balanced_labels(sigma, ny);
  parts.assignment = std::move(sigma);
  parts.source_indices = std::move(source_indices);
  return ClusterModel(std::move(parts));
}

ClusterModel kmeans_baseline(const PointSet& x, Index n_y, Index maxiter, std::uint64_t seed,
                             std::vector<double>* inertia_trace) {
  const Index n = x.size();
  const Index dim = x.dim();
  if (n_y < 1 || n_y > n) throw InvalidArgument("kmeans_baseline: need 1 <= N_Y <= N_X");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // k-means++ seeding.
  RowMatrix centers(n_y, dim);
  Vector dmin = Vector::Constant(n, std::numeric_limits<double>::infinity());
  Index first = std::min<Index>(static_cast<Index>(unif(rng) * static_cast<double>(n)), n - 1);
  centers.row(0) = x.row(first);
  for (Index c = 1; c < n_y; ++c) {
    const auto prev = std::span<const double>(centers.data() + (c - 1) * dim, static_cast<std::size_t>(dim));
    for (Index i = 0; i < n; ++i) dmin[i] = std::min(dmin[i], squared_distance(x.point(i), prev));
    const double total = dmin.sum();
    Index pick = 0;
    if (total > 0.0) {
      const double r = unif(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += dmin[i];
        if (acc > r && dmin[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::min<Index>(c, n - 1);
    }
    centers.row(c) = x.row(pick);
  }

  IndexList labels(static_cast<std::size_t>(n), -1);
  Vector dist(n);
  auto assign = [&]() {
    bool changed = false;
    double inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (Index c = 0; c < n_y; ++c) {
        const double d = squared_distance(x.point(i), std::span<const double>(centers.data() + c * dim,
                                                                               static_cast<std::size_t>(dim)));
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) changed = true;
      labels[static_cast<std::size_t>(i)] = best;
      dist[i] = bd;
      inertia += bd;
    }
    if (inertia_trace) inertia_trace->push_back(inertia);
    return changed;
  };

  for (Index it = 0; it < std::max<Index>(maxiter, 1); ++it) {
    if (!assign() && it > 0) break;
    RowMatrix sums = RowMatrix::Zero(n_y, dim);
    std::vector<Index> counts(static_cast<std::size_t>(n_y), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (Index c = 0; c < n_y; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        // Reseed from the point farthest from its centroid.
        Index far = 0;
        dist.maxCoeff(&far);
        centers.row(c) = x.row(far);
        dist[far] = 0.0;
      }
    }
  }
  assign();

  ClusterModelParts parts;
  parts.centroids = PointSet(std::move(centers));
  parts.rule = AllocationRule::NearestEuclidean;
  parts.training = x;
  parts.labels = std::move(labels);
  return ClusterModel(std::move(parts));
}

ClusterMetrics metrics(const ClusterModel& model, const PointSet& x, const ScaledKernel& k) {
  const IndexList l = model.allocate(x);
  ClusterMetrics m;
  for (Index i = 0; i < x.size(); ++i) {
    m.inertia += squared_distance(x.point(i), model.centroids().point(l[static_cast<std::size_t>(i)]));
  }
  m.mmd = mmd(k, model.centroids(), x);
  return m;
}

}  // namespace rkhs
