#include "rkhs/data.hpp"
#include "rkhs/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace rkhs;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("rkhs_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Matrix random_matrix(Index r, Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = n(rng) * std::pow(10.0, (i + j) % 7 - 3);
  return m;
}

}  // namespace

TEST(PointSet, SelectStackAndDistinct) {
  RowMatrix m(3, 2);
  m << 1, 2, 3, 4, 1, 2;
  PointSet p(m);
  EXPECT_FALSE(p.rows_distinct());
  const Index idx[] = {1, 0};
  PointSet s = p.select(idx);
  EXPECT_TRUE(s.rows_distinct());
  EXPECT_EQ(s.row(0)(0), 3.0);
  EXPECT_EQ(vstack(p, s).size(), 5);
  EXPECT_EQ(hstack(s, s).dim(), 4);
  EXPECT_THROW(hstack(p, s), DimensionError);
}

TEST(Csv, RoundTripIsExact) {
  const Matrix m = random_matrix(7, 5, 3);
  std::stringstream ss;
  write_csv(ss, m);
  const Matrix back = read_csv(ss);
  ASSERT_EQ(back.rows(), 7);
  ASSERT_EQ(back.cols(), 5);
  EXPECT_TRUE((back.array() == m.array()).all());
}

TEST(Csv, FormatUsesDotAndNewline) {
  Matrix m(2, 2);
  m << 0.5, -1.25, 3, 1e-300;
  std::stringstream ss;
  write_csv(ss, m);
  EXPECT_EQ(ss.str(), "0.5,-1.25\n3,1e-300\n");
}

TEST(Csv, RaggedRowReportsOffset) {
  std::stringstream ss("1,2\n3\n");
  try {
    read_csv(ss);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Csv, BadNumberThrows) {
  std::stringstream ss("1,x\n");
  EXPECT_THROW(read_csv(ss), DataError);
}

TEST(KeyValues, CommentsAndTrim) {
  std::stringstream ss("# comment\n a = 1 \n\nb=two\n");
  const KeyValues kv = read_key_values(ss);
  EXPECT_EQ(kv.at("a"), "1");
  EXPECT_EQ(kv.at("b"), "two");
  std::stringstream bad("novalue\n");
  EXPECT_THROW(read_key_values(bad), DataError);
}

TEST(Serialization, KernelAndRegressorRoundTrip) {
  const PointSet x = gen_blobs(2, 20, 3, 5);
  const ScaledKernel k = fit_scaling(x, x, "matern-l1");
  const Matrix fx = x.matrix().rowwise().sum();
  const Regressor r = fit(k, x, fx);
  const fs::path dir = scratch("regressor");
  save_regressor(dir, r);
  const Regressor back = load_regressor(dir);
  EXPECT_EQ(back.kernel().alpha(), k.alpha());
  EXPECT_EQ(back.mode(), r.mode());
  const PointSet z = gen_blobs(2, 10, 3, 6);
  EXPECT_TRUE((predict(back, z).array() == predict(r, z).array()).all());

  const ScaledKernel u = ScaledKernel::unscaled("gaussian", 2);
  save_kernel(dir / "u.txt", u);
  EXPECT_TRUE(load_kernel(dir / "u.txt").is_identity());
}

TEST(Serialization, ClusterModelRoundTrip) {
  ClusterModelParts parts;
  RowMatrix c(2, 1);
  c << 0.0, 10.0;
  parts.centroids = PointSet(c);
  RowMatrix t(4, 1);
  t << -1, 1, 9, 11;
  parts.training = PointSet(t);
  parts.labels = {0, 0, 1, 1};
  const ClusterModel m(parts);
  const fs::path dir = scratch("clusters");
  save_cluster_model(dir, m);
  EXPECT_TRUE(fs::exists(dir / "centroids.csv"));
  EXPECT_TRUE(fs::exists(dir / "assignment.csv"));
  const ClusterModel back = load_cluster_model(dir);
  EXPECT_EQ(back.centroids(), m.centroids());
  EXPECT_EQ(back.labels(), m.labels());
  EXPECT_EQ(back.rule(), m.rule());
}

TEST(Idx, RoundTripFirstImages) {
  IdxImages img;
  img.rows = 28;
  img.cols = 28;
  RowMatrix px(10, 784);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> byte(0, 255);
  for (Index i = 0; i < px.size(); ++i) px.data()[i] = byte(rng) / 255.0;
  img.pixels = PointSet(px);
  const auto bytes = serialize_idx_images(img);
  EXPECT_EQ(bytes[2], 0x08);
  EXPECT_EQ(bytes[3], 0x03);  // 2051 = 0x0803
  const IdxImages back = parse_idx_images(bytes);
  EXPECT_EQ(back.rows, 28);
  EXPECT_EQ(back.cols, 28);
  EXPECT_EQ(back.pixels, img.pixels);
  EXPECT_EQ(serialize_idx_images(back), bytes);

  const std::vector<std::uint8_t> labels = {3, 1, 4, 1, 5};
  EXPECT_EQ(parse_idx_labels(serialize_idx_labels(labels)), labels);
}

TEST(Idx, BadMagicAndTruncation) {
  std::vector<std::uint8_t> labels = serialize_idx_labels({1, 2, 3});
  auto bad = labels;
  bad[3] = 0x02;
  EXPECT_THROW(parse_idx_labels(bad), DataError);
  EXPECT_THROW(parse_idx_images(labels), DataError);
  labels.pop_back();
  try {
    parse_idx_labels(labels);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.offset(), labels.size());
  }
  try {
    parse_idx_images({0, 0});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Idx, BundledDigitsLayout) {
  const LabelledImages d = load_mnist(bundled_digits_dir());
  EXPECT_EQ(d.train.rows, 8);
  EXPECT_EQ(d.train.cols, 8);
  EXPECT_EQ(d.train.pixels.size(), 1437);
  EXPECT_EQ(d.test.pixels.size(), 360);
  EXPECT_GE(d.train.pixels.matrix().minCoeff(), 0.0);
  EXPECT_LE(d.train.pixels.matrix().maxCoeff(), 1.0);
}

TEST(Idx, MnistHeaderWhenAvailable) {
  const char* dir = std::getenv("RKHS_MNIST_DIR");
  if (!dir) GTEST_SKIP() << "RKHS_MNIST_DIR not set";
  const LabelledImages d = load_mnist(dir);
  EXPECT_EQ(d.train.pixels.size(), 60000);
  EXPECT_EQ(d.train.rows, 28);
  EXPECT_EQ(d.train.cols, 28);
  EXPECT_EQ(d.test.pixels.size(), 10000);
}

TEST(OneHot, LabelThree) {
  const Matrix m = one_hot({3});
  ASSERT_EQ(m.cols(), 10);
  for (Index j = 0; j < 10; ++j) EXPECT_EQ(m(0, j), j == 3 ? 1.0 : 0.0);
  EXPECT_THROW(one_hot({10}), InvalidArgument);
}
