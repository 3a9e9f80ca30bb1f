#pragma once

#include "rkhs/common.hpp"
#include "rkhs/data.hpp"
#include "rkhs/io.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/transport.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rkhs {

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class Experiment { Cluster, Mnist, Ot, Bachelier, Conditional };

Experiment parse_experiment(const std::string& tag);
std::string experiment_tag(Experiment e);

/// Flat key=value configuration. Unknown keys are rejected.
struct ExperimentConfig {
  Experiment experiment = Experiment::Cluster;
  std::uint64_t seed = 0;
  std::string kernel;
  std::vector<std::string> methods;
  /// Grid of sample sizes (N_X, or N for ot / bachelier / conditional).
  std::vector<Index> sizes;
  /// N_Y, the number of centers or clusters.
  Index n_y = 0;
  std::vector<Index> dims;
  /// Write measured wall-clock times; off gives byte-identical CSVs.
  bool timing = true;
  /// Experiment-specific settings (all recognized keys, defaults filled in).
  KeyValues params;
  std::optional<std::filesystem::path> mnist_dir;

  double real(const std::string& key) const;
  Index integer(const std::string& key) const;
};

/// Defaults for `experiment`, overridden by `kv`.
ExperimentConfig make_config(Experiment experiment, const KeyValues& kv = {});
ExperimentConfig load_config(Experiment experiment, const std::filesystem::path& path);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  double number(std::size_t row, const std::string& column) const;
  const std::string& text(std::size_t row, const std::string& column) const;
  /// Rows whose first column equals `method`.
  std::vector<std::size_t> rows_of(const std::string& method) const;
};

struct ExperimentOutput {
  ResultTable table;
  /// name -> two-column (x, y) data.
  std::map<std::string, Matrix> plots;
};

ExperimentOutput run_experiment(const ExperimentConfig& config);

/// results.csv plus one <name>.plotdata per plot.
void write_outputs(const std::filesystem::path& dir, const ExperimentOutput& out);
void write_table(std::ostream& os, const ResultTable& t);

// ---------------------------------------------------------------------------
// Individual drivers, also used by the test suites.

ExperimentOutput cluster_benchmark(const ExperimentConfig& c);
ExperimentOutput mnist_classify(const ExperimentConfig& c);
ExperimentOutput ot_benchmark(const ExperimentConfig& c);
ExperimentOutput bachelier_benchmark(const ExperimentConfig& c);
ExperimentOutput conditional_demo(const ExperimentConfig& c);

/// One-hot clamped to [delta, 1 - delta] and row-normalized, then log.
Matrix log_label_targets(const std::vector<std::uint8_t>& labels, double delta = 1e-3, Index classes = 10);

/// Accuracy of an extrapolation fit on the given training rows.
double classification_accuracy(const ScaledKernel& k, const LabelledImages& data, const IndexList& centers,
                               double delta = 1e-3);

/// Centers for the mnist driver: "greedy" (discrepancy), "function" (residual greedy) or "random".
IndexList select_centers(const std::string& method, const ScaledKernel& k, const LabelledImages& data, Index n,
                         std::uint64_t seed, double delta = 1e-3);

struct OtInstance {
  PointSet x;  ///< uniform on [-1/2, 1/2]^D
  PointSet y;  ///< S(x), rows shuffled
  PointSet z;  ///< fresh test points
  Matrix sz;   ///< S(z)
};

/// S(x) = x |x|_2^2.
Matrix ot_target_map(const PointSet& x);
OtInstance make_ot_instance(Index n, Index d, std::uint64_t seed, Index n_test);

/// Mean over test points of |T(z) - S(z)|^2.
double ot_mse(const Eigen::Ref<const Matrix>& predicted, const Eigen::Ref<const Matrix>& truth);

/// Image of the test points under "cot", "cot-ms" (C = max(1, N / cluster_size)) or "cot-ms-1".
Matrix ot_predict(const std::string& method, const OtInstance& inst, const std::string& kernel,
                  Index cluster_size = 256, std::uint64_t seed = 0, bool erfinv = true);

struct BachelierRun {
  BrownianBasket basket;
  PointSet x, y, z;
  Matrix reference;  ///< closed form at z
  Matrix estimate;   ///< method estimate at z
  double score = 0.0;
  std::vector<double> objective;  ///< J per iterate (pi only)
};

/// `kernel` builds the transition matrix, `extrapolation_kernel` carries the estimate from X to Z.
BachelierRun bachelier_run(const std::string& method, Index n, Index d, std::uint64_t seed,
                           const std::string& kernel = "gaussian",
                           const std::string& extrapolation_kernel = "matern-l1", double strike = 0.0, double eps = 1e-12,
                           Index maxiter = 200, bool euclidean_reindex = false);

}  // namespace rkhs
