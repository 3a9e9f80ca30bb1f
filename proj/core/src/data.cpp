#include "rkhs/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

namespace rkhs {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kImageMagic = 2051;
constexpr std::uint32_t kLabelMagic = 2049;

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
  if (off + 4 > b.size()) throw DataError("idx: truncated header", off);
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 24));
  b.push_back(static_cast<std::uint8_t>(v >> 16));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

PointSet gen_blobs(Index modes, Index n, Index d, std::uint64_t seed, double spread) {
  if (modes < 1) throw InvalidArgument("gen_blobs: modes must be >= 1");
  if (n < 0 || d < 1) throw InvalidArgument("gen_blobs: bad shape");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-spread, spread);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Index> pick(0, modes - 1);
  RowMatrix centers(modes, d);
  for (Index m = 0; m < modes; ++m) {
    for (Index j = 0; j < d; ++j) centers(m, j) = uni(rng);
  }
  RowMatrix out(n, d);
  for (Index i = 0; i < n; ++i) {
    const Index m = pick(rng);
    for (Index j = 0; j < d; ++j) out(i, j) = centers(m, j) + normal(rng);
  }
  return PointSet(std::move(out));
}

IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes) {
  const std::uint32_t magic = be32(bytes, 0);
  if (magic != kImageMagic) throw DataError("idx: bad image magic " + std::to_string(magic), 0);
  const std::uint32_t count = be32(bytes, 4);
  const std::uint32_t rows = be32(bytes, 8);
  const std::uint32_t cols = be32(bytes, 12);
  const std::size_t pixels = std::size_t{rows} * cols;
  const std::size_t need = 16 + std::size_t{count} * pixels;
  if (bytes.size() < need) throw DataError("idx: truncated image data", bytes.size());
  RowMatrix m(count, static_cast<Index>(pixels));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t p = 0; p < pixels; ++p) {
      m(static_cast<Index>(i), static_cast<Index>(p)) = bytes[16 + i * pixels + p] / 255.0;
    }
  }
  return {static_cast<Index>(rows), static_cast<Index>(cols), PointSet(std::move(m))};
}

std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes) {
  const std::uint32_t magic = be32(bytes, 0);
  if (magic != kLabelMagic) throw DataError("idx: bad label magic " + std::to_string(magic), 0);
  const std::uint32_t count = be32(bytes, 4);
  if (bytes.size() < 8 + std::size_t{count}) throw DataError("idx: truncated label data", bytes.size());
  return {bytes.begin() + 8, bytes.begin() + 8 + count};
}

IdxImages read_idx_images(const fs::path& path) { return parse_idx_images(read_bytes(path)); }
std::vector<std::uint8_t> read_idx_labels(const fs::path& path) { return parse_idx_labels(read_bytes(path)); }

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images) {
  const Index n = images.pixels.size();
  if (images.pixels.dim() != images.rows * images.cols) throw DimensionError("idx: shape mismatch");
  std::vector<std::uint8_t> b;
  b.reserve(static_cast<std::size_t>(16 + n * images.pixels.dim()));
  put32(b, kImageMagic);
  put32(b, static_cast<std::uint32_t>(n));
  put32(b, static_cast<std::uint32_t>(images.rows));
  put32(b, static_cast<std::uint32_t>(images.cols));
  for (Index i = 0; i < n; ++i) {
    for (Index p = 0; p < images.pixels.dim(); ++p) {
      const double v = std::clamp(images.pixels.matrix()(i, p), 0.0, 1.0);
      b.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
    }
  }
  return b;
}

std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> b;
  put32(b, kLabelMagic);
  put32(b, static_cast<std::uint32_t>(labels.size()));
  b.insert(b.end(), labels.begin(), labels.end());
  return b;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

LabelledImages load_mnist(const fs::path& dir) {
  LabelledImages d;
  d.train = read_idx_images(dir / "train-images-idx3-ubyte");
  d.train_labels = read_idx_labels(dir / "train-labels-idx1-ubyte");
  d.test = read_idx_images(dir / "t10k-images-idx3-ubyte");
  d.test_labels = read_idx_labels(dir / "t10k-labels-idx1-ubyte");
  if (static_cast<Index>(d.train_labels.size()) != d.train.pixels.size() ||
      static_cast<Index>(d.test_labels.size()) != d.test.pixels.size()) {
    throw DataError("idx: image and label counts differ in " + dir.string());
  }
  return d;
}

fs::path bundled_digits_dir() {
  const fs::path source = fs::path(RKHS_SOURCE_DATA_DIR) / "digits";
  if (fs::exists(source / "train-images-idx3-ubyte")) return source;
  return fs::path(RKHS_INSTALL_DATA_DIR) / "digits";
}

Matrix one_hot(const std::vector<std::uint8_t>& labels, Index classes) {
  Matrix m = Matrix::Zero(static_cast<Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) throw InvalidArgument("one_hot: label out of range");
    m(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return m;
}

PointSet BrownianBasket::sample(Index n, double t, std::uint64_t seed) const {
  const Index d = sigma.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) w(i, j) = normal(rng);
  }
  return PointSet::from(std::sqrt(t) * w * sigma.transpose());
}

PointSet BrownianBasket::evolve(const PointSet& x, double dt, std::uint64_t seed) const {
  const PointSet inc = sample(x.size(), dt, seed);
  return PointSet::from(x.matrix() + inc.matrix());
}

Vector BrownianBasket::basket(const PointSet& x) const { return x.matrix() * omega; }

Matrix BrownianBasket::payoff(const PointSet& x) const {
  return (basket(x).array() - strike).cwiseMax(0.0).matrix();
}

Matrix BrownianBasket::conditional_payoff(const PointSet& x) const {
  const Vector b = basket(x);
  Matrix out(b.size(), 1);
  for (Index i = 0; i < b.size(); ++i) out(i, 0) = bachelier_price(b(i), strike, theta, t2 - t1);
  return out;
}

BrownianBasket make_basket(Index d, std::uint64_t seed, double theta, double strike) {
  if (d < 1) throw InvalidArgument("make_basket: dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  BrownianBasket b;
  b.sigma = Matrix(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) b.sigma(i, j) = normal(rng);
  }
  b.omega = Vector(d);
  for (Index i = 0; i < d; ++i) b.omega(i) = normal(rng);
  b.omega /= b.omega.lpNorm<1>();
  b.sigma *= theta / (b.sigma.transpose() * b.omega).norm();
  b.theta = theta;
  b.strike = strike;
  return b;
}

double bachelier_price(double b, double strike, double theta, double tau) {
  const double s = theta * std::sqrt(tau);
  const double m = (b - strike) / s;
  const double density = std::exp(-0.5 * m * m) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-m / std::numbers::sqrt2);
  return s * density + (b - strike) * cdf;
}

}  // namespace rkhs
