#include "rkhs/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numeric>

namespace rkhs {

PointSet::PointSet(RowMatrix data) : data_(std::move(data)) {
  if (!data_.allFinite()) throw InvalidArgument("point set contains non-finite entries");
}

PointSet PointSet::from(const Eigen::Ref<const Matrix>& m) {
  return PointSet(RowMatrix(m));
}

PointSet PointSet::select(std::span<const Index> indices) const {
  RowMatrix out(static_cast<Index>(indices.size()), dim());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= size()) throw InvalidArgument("row index out of range");
    out.row(static_cast<Index>(i)) = data_.row(indices[i]);
  }
  return PointSet(std::move(out));
}

bool PointSet::rows_distinct() const {
  const Index n = size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  auto less = [&](Index a, Index b) {
    for (Index d = 0; d < dim(); ++d) {
      if (data_(a, d) != data_(b, d)) return data_(a, d) < data_(b, d);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!less(order[i - 1], order[i]) && !less(order[i], order[i - 1])) return false;
  }
  return true;
}

PointSet vstack(const PointSet& a, const PointSet& b) {
  require_same_dim(a, b, "vstack");
  RowMatrix out(a.size() + b.size(), a.dim());
  out.topRows(a.size()) = a.matrix();
  out.bottomRows(b.size()) = b.matrix();
  return PointSet(std::move(out));
}

PointSet hstack(const PointSet& a, const PointSet& b) {
  if (a.size() != b.size()) throw DimensionError("hstack: row counts differ");
  RowMatrix out(a.size(), a.dim() + b.dim());
  out.leftCols(a.dim()) = a.matrix();
  out.rightCols(b.dim()) = b.matrix();
  return PointSet(std::move(out));
}

Matrix select_rows(const Eigen::Ref<const Matrix>& m, std::span<const Index> indices) {
  Matrix out(static_cast<Index>(indices.size()), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) out.row(static_cast<Index>(i)) = m.row(indices[i]);
  return out;
}

void require_same_dim(const PointSet& a, const PointSet& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionError(std::string(what) + ": feature dimensions differ (" +
                         std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

bool debug_checks_enabled() {
  const char* v = std::getenv("RKHS_DEBUG");
  return v != nullptr && *v != '\0' && std::strcmp(v, "0") != 0;
}

}  // namespace rkhs
