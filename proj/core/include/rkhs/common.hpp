#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rkhs {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexList = std::vector<Index>;

// Error hierarchy. Everything thrown by the library derives from rkhs::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IllConditionedError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  DataError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  explicit DataError(const std::string& what) : Error(what) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_ = 0;
};

/// N x D point cloud, one point per row. Entries are finite.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(RowMatrix data);
  PointSet(Index n, Index d) : PointSet(RowMatrix::Zero(n, d)) {}

  static PointSet from(const Eigen::Ref<const Matrix>& m);

  Index size() const noexcept { return data_.rows(); }
  Index dim() const noexcept { return data_.cols(); }
  bool empty() const noexcept { return data_.rows() == 0; }

  const RowMatrix& matrix() const noexcept { return data_; }
  auto row(Index i) const { return data_.row(i); }
  std::span<const double> point(Index i) const {
    return {data_.data() + i * data_.cols(), static_cast<std::size_t>(data_.cols())};
  }

  PointSet select(std::span<const Index> indices) const;

  /// True when no two rows are identical.
  bool rows_distinct() const;

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           a.data_ == b.data_;
  }

 private:
  RowMatrix data_;
};

PointSet vstack(const PointSet& a, const PointSet& b);
PointSet hstack(const PointSet& a, const PointSet& b);

/// Rows of `m` gathered in the order given by `indices`.
Matrix select_rows(const Eigen::Ref<const Matrix>& m, std::span<const Index> indices);

void require_same_dim(const PointSet& a, const PointSet& b, const char* what);

/// Debug-mode toggle read from RKHS_DEBUG in the environment.
bool debug_checks_enabled();

}  // namespace rkhs
