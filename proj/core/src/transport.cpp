#include "rkhs/transport.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rkhs {

namespace {

ScaledKernel kernel_like(const ScaledKernel& k, const PointSet& data) {
  if (k.is_identity()) return ScaledKernel::unscaled(k.base_ptr(), data.dim());
  ScalingOptions opts;
  opts.use_erfinv = k.uses_erfinv();
  return fit_scaling(data, data, k.base_ptr(), opts);
}

Matrix squared_distances(const PointSet& x, const PointSet& y) {
  Matrix c(x.size(), y.size());
  for (Index i = 0; i < x.size(); ++i) {
    for (Index j = 0; j < y.size(); ++j) c(i, j) = (x.matrix().row(i) - y.matrix().row(j)).squaredNorm();
  }
  return c;
}

}  // namespace

SamplerMap::SamplerMap(Regressor forward, std::optional<Regressor> inverse, Assignment sigma)
    : forward_(std::move(forward)), inverse_(std::move(inverse)), sigma_(std::move(sigma)) {}

double frobenius_objective(const Eigen::Ref<const Matrix>& neg_laplacian, const PointSet& y,
                           const Assignment& sigma) {
  const Matrix ys = y.select(sigma).matrix();
  return (ys.transpose() * neg_laplacian * ys).trace();
}

FrobeniusGain::FrobeniusGain(Matrix neg_laplacian, const PointSet& y, const Assignment& sigma)
    : l_(std::move(neg_laplacian)), y_(y.matrix()) {
  if (l_.rows() != y.size() || l_.cols() != y.size()) throw DimensionError("FrobeniusGain: size mismatch");
  b_ = l_ * y.select(sigma).matrix();
  norms_ = y_.rowwise().squaredNorm();
}

double FrobeniusGain::gain(Index i, Index j, const Assignment& sigma) const {
  const Index p = sigma[static_cast<std::size_t>(i)];
  const Index q = sigma[static_cast<std::size_t>(j)];
  // Rows i and j of Y o sigma exchange: delta = (e_i - e_j) (y_q - y_p)^T.
  const auto dy = y_.row(q) - y_.row(p);
  const double linear = (b_.row(i) - b_.row(j)).dot(dy);
  const double quad = (l_(i, i) + l_(j, j) - 2.0 * l_(i, j)) * dy.squaredNorm();
  return -(2.0 * linear + quad);
}

void FrobeniusGain::swapped(Index i, Index j, const Assignment& sigma) {
  const Index q = sigma[static_cast<std::size_t>(i)];
  const Index p = sigma[static_cast<std::size_t>(j)];
  b_.noalias() += (l_.col(i) - l_.col(j)) * (y_.row(q) - y_.row(p));
}

SamplerMap sample_map(const ScaledKernel& k, const PointSet& x, const PointSet& y, const SampleMapOptions& options) {
  if (x.size() != y.size()) throw DimensionError("sample_map: X and Y must have the same number of rows");
  if (x.empty()) throw InvalidArgument("sample_map: empty sample");
  if (!x.rows_distinct() || !y.rows_distinct()) throw InvalidArgument("sample_map: duplicate rows");

  Assignment sigma;
  if (x.dim() == y.dim()) {
    sigma = lsap_exact(options.euclidean_cost ? squared_distances(x, y) : discrepancy_matrix(k, x, y));
  } else {
    Matrix l = -laplacian_operator(k, x);
    sigma = identity_assignment(x.size());
    FrobeniusGain fg(l, y, sigma);
    GainOracle oracle;
    oracle.gain = [&](Index i, Index j, const Assignment& s) { return fg.gain(i, j, s); };
    oracle.on_swap = [&](Index i, Index j, double, const Assignment& s) { fg.swapped(i, j, s); };
    oracle.cost = [&](const Assignment& s) { return frobenius_objective(l, y, s); };
    DescentOptions d = options.descent;
    d.sweep = Sweep::Full;
    sigma = permutation_descent(oracle, std::move(sigma), d).sigma;
  }

  const PointSet ys = y.select(sigma);
  Regressor forward = fit(k, x, ys.matrix());
  std::optional<Regressor> inverse;
  if (options.fit_inverse) {
    const ScaledKernel ky = options.inverse_kernel ? *options.inverse_kernel : kernel_like(k, ys);
    inverse = fit(ky, ys, x.matrix());
  }
  return SamplerMap(std::move(forward), std::move(inverse), std::move(sigma));
}

Matrix generate(const SamplerMap& s, const PointSet& z_latent) { return predict(s.forward(), z_latent); }

Matrix encode(const SamplerMap& s, const PointSet& y) {
  if (!s.inverse()) throw InvalidArgument("encode: sampler was fitted without an inverse map");
  return predict(*s.inverse(), y);
}

PointSet standard_normal(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix out(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) out(i, j) = normal(rng);
  }
  return PointSet(std::move(out));
}

ConditionalSampler::ConditionalSampler(std::optional<SamplerMap> encoder, SamplerMap decoder, PointSet latent,
                                       Index dim_x, Index dim_y, Index latent_y)
    : encoder_(std::move(encoder)),
      decoder_(std::move(decoder)),
      latent_(std::move(latent)),
      dim_x_(dim_x),
      dim_y_(dim_y),
      latent_y_(latent_y) {}

Matrix ConditionalSampler::joint(const PointSet& eta) const { return generate(decoder_, eta); }

Matrix ConditionalSampler::condition_latent(const PointSet& x) const {
  if (x.dim() != dim_x_) throw DimensionError("conditional sampler: condition dimension mismatch");
  return encoder_ ? generate(*encoder_, x) : Matrix(x.matrix());
}

Matrix ConditionalSampler::sample(const PointSet& x, const PointSet& eta_y) const {
  if (x.size() != eta_y.size()) throw DimensionError("conditional sampler: conditions and draws must pair up");
  if (eta_y.dim() != latent_y_) throw DimensionError("conditional sampler: noise dimension mismatch");
  const PointSet h = hstack(PointSet::from(condition_latent(x)), eta_y);
  return joint(h).rightCols(dim_y_);
}

Matrix ConditionalSampler::sample(std::span<const double> x, Index count, std::uint64_t seed) const {
  RowMatrix rep(count, static_cast<Index>(x.size()));
  for (Index i = 0; i < count; ++i) {
    for (Index d = 0; d < rep.cols(); ++d) rep(i, d) = x[static_cast<std::size_t>(d)];
  }
  return sample(PointSet(std::move(rep)), standard_normal(count, latent_y_, seed));
}

ConditionalSampler conditional_sampler(const PointSet& x, const PointSet& y, std::shared_ptr<const BaseKernel> base,
                                       const ConditionalOptions& options) {
  if (x.size() != y.size()) throw DimensionError("conditional_sampler: X and Y must have the same number of rows");
  if (!base) throw InvalidArgument("conditional_sampler: null kernel");
  const Index ly = options.latent_y < 0 ? std::min<Index>(y.dim(), 8) : options.latent_y;
  if (ly < 1) throw InvalidArgument("conditional_sampler: noise dimension must be >= 1");
  if (options.latent_x < 0) throw InvalidArgument("conditional_sampler: negative latent dimension");

  const PointSet eta_y = standard_normal(x.size(), ly, options.seed);
  std::optional<SamplerMap> encoder;
  PointSet ex = x;
  if (options.latent_x > 0) {
    const PointSet eta_x = standard_normal(x.size(), options.latent_x, options.seed + 1);
    SampleMapOptions enc_opts;
    enc_opts.fit_inverse = false;
    encoder = sample_map(fit_scaling(x, x, base, options.scaling), x, eta_x, enc_opts);
    ex = eta_x.select(encoder->sigma());
  }
  const PointSet h = hstack(ex, eta_y);
  const PointSet target = hstack(x, y);
  SampleMapOptions dec_opts;
  dec_opts.fit_inverse = false;
  SamplerMap decoder = sample_map(fit_scaling(h, h, base, options.scaling), h, target, dec_opts);
  return ConditionalSampler(std::move(encoder), std::move(decoder), h, x.dim(), y.dim(), ly);
}

double bistochastic_deviation(const Eigen::Ref<const Matrix>& p) {
  const double rows = (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double cols = (p.colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(rows, cols);
}

BiStochasticMatrix ipf(const Eigen::Ref<const Matrix>& m, double tol, Index maxiter) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DimensionError("ipf: matrix must be square and nonempty");
  if (!m.allFinite() || (m.array() < 0.0).any()) throw InvalidArgument("ipf: entries must be finite and >= 0");
  if ((m.rowwise().sum().array() <= 0.0).any() || (m.colwise().sum().array() <= 0.0).any()) {
    throw InvalidArgument("ipf: zero row or column");
  }
  BiStochasticMatrix out;
  out.values = m;
  Matrix& p = out.values;
  for (Index it = 0;; ++it) {
    if (bistochastic_deviation(p) <= tol) {
      out.iterations = it;
      out.converged = true;
      return out;
    }
    if (it >= maxiter) {
      out.iterations = it;
      out.converged = false;
      return out;
    }
    p.array().colwise() /= p.rowwise().sum().array();
    p.array().rowwise() /= p.colwise().sum().array();
  }
}

BiStochasticMatrix transition_nw(const ScaledKernel& k, const PointSet& x, const PointSet& y, double tol,
                                 const NadarayaWatsonOptions& options) {
  if (x.size() != y.size()) throw DimensionError("transition_nw: X and Y must have the same size");
  const Matrix kx = gram(k, x, x);
  const Matrix ky = gram(k, y, y);
  Matrix p = options.hadamard ? Matrix(kx.cwiseProduct(ky)) : Matrix(kx * ky);
  p = p.cwiseMax(0.0);
  return ipf(p, tol, options.maxiter);
}

PiResult pi_algorithm(const ScaledKernel& k, const PointSet& x, const PointSet& y, double eps, Index maxiter,
                      const PiOptions& options) {
  require_same_dim(x, y, "pi_algorithm");
  const Index n = x.size();
  if (y.size() != n) throw DimensionError("pi_algorithm: X and Y must have the same size");

  PiResult res;
  if (options.euclidean_reindex) {
    res.sigma = lsap_exact(squared_distances(x, y));
  } else {
    res.sigma = lsap_exact(discrepancy_matrix(k, x, y));
  }

  Matrix xc = x.matrix();
  xc.rowwise() -= xc.colwise().mean();
  Matrix yc = y.matrix();
  yc.rowwise() -= yc.colwise().mean();
  const Matrix y0 = select_rows(yc, res.sigma);

  Matrix pi = Matrix::Identity(n, n);
  Matrix yn = y0;
  Matrix r = xc - yn;
  res.objective.push_back(r.squaredNorm());
  res.constraint_deviation.push_back(bistochastic_deviation(pi));

  Index it = 0;
  for (; it < maxiter; ++it) {
    // Direction W = R Y^{n,T}; along it Y moves by W Y^0 = R (Y^{n,T} Y^0).
    const Matrix gram_ny = yn.transpose() * y0;
    const Matrix move = r * gram_ny;
    const double denom = move.squaredNorm();
    if (!(denom > 0.0)) break;
    const double t = (r.array() * move.array()).sum() / denom;
    pi.noalias() += (t * r) * yn.transpose();
    const Matrix next = yn + t * move;
    const double change = (next - yn).norm();
    yn = next;
    r = xc - yn;
    res.objective.push_back(r.squaredNorm());
    res.constraint_deviation.push_back(bistochastic_deviation(pi));
    if (change <= eps) {
      ++it;
      break;
    }
  }

  // Undo the reindexing: (Pi o sigma^-1)[i, sigma(c)] = Pi[i, c].
  Matrix out(n, n);
  for (Index c = 0; c < n; ++c) out.col(res.sigma[static_cast<std::size_t>(c)]) = pi.col(c);
  res.pi.values = std::move(out);
  res.pi.iterations = it;
  res.pi.converged = it < maxiter;
  return res;
}

Matrix conditional_expectation(const BiStochasticMatrix& p, const Eigen::Ref<const Matrix>& gy) {
  if (p.values.cols() != gy.rows()) throw DimensionError("conditional_expectation: dimension mismatch");
  return p.values * gy;
}

}  // namespace rkhs
