#include "rkhs/kernel.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace rkhs {

void BaseKernel::gradient(std::span<const double>, std::span<const double>,
                          std::span<double>) const {
  throw InvalidArgument("gradient unavailable for kernel '" + tag() + "'");
}

double GaussianKernel::operator()(std::span<const double> x, std::span<const double> y) const {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double t = x[d] - y[d];
    s += t * t;
  }
  return std::exp(-s);
}

void GaussianKernel::gradient(std::span<const double> x, std::span<const double> y,
                              std::span<double> out) const {
  const double k = (*this)(x, y);
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = -2.0 * (x[d] - y[d]) * k;
}

double MaternL1Kernel::operator()(std::span<const double> x, std::span<const double> y) const {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) s += std::abs(x[d] - y[d]);
  return std::exp(-s);
}

void MaternL1Kernel::gradient(std::span<const double> x, std::span<const double> y,
                              std::span<double> out) const {
  const double k = (*this)(x, y);
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double t = x[d] - y[d];
    out[d] = t > 0.0 ? -k : (t < 0.0 ? k : 0.0);
  }
}

namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, KernelFactory> factories;

  Registry() {
    factories["gaussian"] = [] { return std::make_shared<const GaussianKernel>(); };
    factories["matern-l1"] = [] { return std::make_shared<const MaternL1Kernel>(); };
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_kernel(const std::string& tag, KernelFactory factory) {
  if (tag.empty() || !factory) throw InvalidArgument("register_kernel: empty tag or factory");
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.factories[tag] = std::move(factory);
}

std::shared_ptr<const BaseKernel> make_kernel(const std::string& tag) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  auto it = r.factories.find(tag);
  if (it == r.factories.end()) throw InvalidArgument("unknown kernel family '" + tag + "'");
  return it->second();
}

std::vector<std::string> registered_kernels() {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  std::vector<std::string> tags;
  for (const auto& [tag, _] : r.factories) tags.push_back(tag);
  return tags;
}

ScaledKernel::ScaledKernel(std::shared_ptr<const BaseKernel> base, Vector lower, Vector range,
                           double alpha, bool use_erfinv)
    : base_(std::move(base)),
      lower_(std::move(lower)),
      range_(std::move(range)),
      alpha_(alpha),
      use_erfinv_(use_erfinv) {
  if (!base_) throw InvalidArgument("ScaledKernel: null base kernel");
  if (lower_.size() != range_.size()) throw DimensionError("ScaledKernel: lower/range size mismatch");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw InvalidArgument("ScaledKernel: alpha must be positive");
  if ((range_.array() < 0.0).any()) throw InvalidArgument("ScaledKernel: negative feature range");
}

ScaledKernel ScaledKernel::unscaled(std::shared_ptr<const BaseKernel> base, Index dim) {
  ScaledKernel k(std::move(base), Vector::Zero(dim), Vector::Ones(dim), 1.0, false);
  k.identity_ = true;
  return k;
}

ScaledKernel ScaledKernel::unscaled(const std::string& tag, Index dim) {
  return unscaled(make_kernel(tag), dim);
}

double ScaledKernel::map_coordinate(Index d, double v) const {
  if (identity_) return v;
  double u = range_[d] > 0.0 ? (v - lower_[d]) / range_[d] : 0.5;
  if (use_erfinv_) {
    u = std::clamp(u, kErfinvMargin, 1.0 - kErfinvMargin);
    u = boost::math::erf_inv(u);
  }
  return u / alpha_;
}

RowMatrix ScaledKernel::to_unit_cube(const PointSet& x) const {
  if (x.dim() != dim()) throw DimensionError("ScaledKernel: point dimension mismatch");
  RowMatrix out(x.size(), x.dim());
  for (Index i = 0; i < x.size(); ++i) {
    for (Index d = 0; d < x.dim(); ++d) {
      const double v = x.matrix()(i, d);
      out(i, d) = range_[d] > 0.0 ? (v - lower_[d]) / range_[d] : 0.5;
    }
  }
  return out;
}

RowMatrix ScaledKernel::map(const PointSet& x) const {
  if (x.dim() != dim()) throw DimensionError("ScaledKernel: point dimension mismatch");
  RowMatrix out(x.size(), x.dim());
  for (Index i = 0; i < x.size(); ++i) {
    for (Index d = 0; d < x.dim(); ++d) out(i, d) = map_coordinate(d, x.matrix()(i, d));
  }
  return out;
}

void ScaledKernel::map_point(std::span<const double> x, std::span<double> out) const {
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = map_coordinate(static_cast<Index>(d), x[d]);
}

void ScaledKernel::map_derivative(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto d = static_cast<Index>(i);
    if (identity_) {
      out[i] = 1.0;
      continue;
    }
    if (range_[d] <= 0.0) {
      out[i] = 0.0;
      continue;
    }
    const double u = (x[i] - lower_[d]) / range_[d];
    double du = 1.0 / range_[d];
    if (use_erfinv_) {
      if (u <= kErfinvMargin || u >= 1.0 - kErfinvMargin) {
        out[i] = 0.0;
        continue;
      }
      const double e = boost::math::erf_inv(u);
      du *= 0.5 * std::sqrt(std::numbers::pi) * std::exp(e * e);
    }
    out[i] = du / alpha_;
  }
}

double ScaledKernel::operator()(std::span<const double> x, std::span<const double> y) const {
  std::vector<double> a(x.size()), b(y.size());
  map_point(x, a);
  map_point(y, b);
  return (*base_)(a, b);
}

namespace {

// Strided subset of at most `cap` rows.
std::vector<Index> strided_rows(Index n, Index cap) {
  std::vector<Index> rows;
  if (n <= cap) {
    rows.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    return rows;
  }
  const double step = static_cast<double>(n) / static_cast<double>(cap);
  for (Index i = 0; i < cap; ++i) rows.push_back(static_cast<Index>(std::floor(i * step)));
  return rows;
}

}  // namespace

ScaledKernel fit_scaling(const PointSet& x, const PointSet& y, const std::string& family,
                         const ScalingOptions& options) {
  return fit_scaling(x, y, make_kernel(family), options);
}

ScaledKernel fit_scaling(const PointSet& x, const PointSet& y,
                         std::shared_ptr<const BaseKernel> base, const ScalingOptions& options) {
  if (x.empty() || y.empty()) throw InvalidArgument("fit_scaling: empty point set");
  require_same_dim(x, y, "fit_scaling");

  const Vector lower = x.matrix().colwise().minCoeff().transpose();
  const Vector upper = x.matrix().colwise().maxCoeff().transpose();
  const Vector range = upper - lower;

  // Temporary kernel with alpha = 1 to reuse the S3 map.
  ScaledKernel cube(base, lower, range, 1.0, options.use_erfinv);
  const RowMatrix ux = cube.to_unit_cube(x);
  const RowMatrix uy = cube.to_unit_cube(y);

  Index cap_x = x.size();
  Index cap_y = y.size();
  if (static_cast<double>(cap_x) * static_cast<double>(cap_y) >
      static_cast<double>(options.max_alpha_pairs)) {
    const auto side = static_cast<Index>(std::sqrt(static_cast<double>(options.max_alpha_pairs)));
    cap_x = std::min(cap_x, side);
    cap_y = std::min(cap_y, side);
  }
  const auto rx = strided_rows(x.size(), cap_x);
  const auto ry = strided_rows(y.size(), cap_y);

  const int p = base->distance_order();
  double total = 0.0;
  for (Index i : rx) {
    double row_sum = 0.0;
    for (Index j : ry) {
      double s = 0.0;
      for (Index d = 0; d < x.dim(); ++d) {
        const double t = std::abs(ux(i, d) - uy(j, d));
        s += p == 1 ? t : (p == 2 ? t * t : std::pow(t, p));
      }
      row_sum += s;
    }
    total += row_sum;
  }
  const double alpha = total / (static_cast<double>(rx.size()) * static_cast<double>(ry.size()));
  if (!(alpha > 0.0)) throw InvalidArgument("fit_scaling: degenerate point set");
  return ScaledKernel(std::move(base), lower, range, alpha, options.use_erfinv);
}

}  // namespace rkhs
