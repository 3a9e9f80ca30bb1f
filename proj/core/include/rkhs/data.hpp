#pragma once

#include "rkhs/common.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace rkhs {

/// Equal-weight mixture of `modes` unit-variance Gaussians in dimension d. Mode
/// centers are drawn uniformly in [-spread, spread]^d from the same seed.
PointSet gen_blobs(Index modes, Index n, Index d, std::uint64_t seed, double spread = 5.0);

// IDX files (big-endian). Images carry magic 2051, labels 2049.
struct IdxImages {
  Index rows = 0;
  Index cols = 0;
  /// One image per row, pixel values scaled to [0, 1].
  PointSet pixels;
};

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);
IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes);

/// Pixels are rounded back to bytes (v * 255).
std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images);
std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

struct LabelledImages {
  IdxImages train;
  std::vector<std::uint8_t> train_labels;
  IdxImages test;
  std::vector<std::uint8_t> test_labels;
};

/// Reads train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte and
/// t10k-labels-idx1-ubyte from `dir`.
LabelledImages load_mnist(const std::filesystem::path& dir);

/// Bundled 8x8 digits in the same layout (1437 train, 360 test images).
std::filesystem::path bundled_digits_dir();

/// N x classes indicator matrix.
Matrix one_hot(const std::vector<std::uint8_t>& labels, Index classes = 10);

/// dX_t = sigma dW_t in R^D, basket b_t = <omega, X_t> with |omega|_1 = 1 and
/// db_t = theta dW_t.
struct BrownianBasket {
  Matrix sigma;
  Vector omega;
  double theta = 0.2;
  double t1 = 1.0;
  double t2 = 2.0;
  double strike = 0.0;

  /// N draws of X_t.
  PointSet sample(Index n, double t, std::uint64_t seed) const;
  /// Continues the paths x by a Brownian increment over dt.
  PointSet evolve(const PointSet& x, double dt, std::uint64_t seed) const;
  Vector basket(const PointSet& x) const;
  /// max(b(x) - K, 0), one column.
  Matrix payoff(const PointSet& x) const;
  /// E[P(X_t2) | X_t1 = x] in closed form, one column.
  Matrix conditional_payoff(const PointSet& x) const;
};

/// Random sigma and omega, with sigma rescaled so that omega^T sigma sigma^T omega = theta^2.
BrownianBasket make_basket(Index d, std::uint64_t seed, double theta = 0.2, double strike = 0.0);

/// theta sqrt(tau) phi(m) + (b - K) Phi(m), m = (b - K) / (theta sqrt(tau)).
double bachelier_price(double b, double strike, double theta, double tau);

}  // namespace rkhs
