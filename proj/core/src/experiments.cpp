#include "rkhs/experiments.hpp"

#include "rkhs/clustering.hpp"
#include "rkhs/kernel_ops.hpp"
#include "rkhs/multiscale.hpp"
#include "rkhs/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace rkhs {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer on (seed, stream)
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + stream + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Index to_index(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size()) throw ConfigError("");
    return static_cast<Index>(n);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw ConfigError("");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

std::vector<Index> index_list(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  for (const auto& s : split_list(v)) out.push_back(to_index(key, s));
  if (out.empty()) throw ConfigError("config: '" + key + "' is empty");
  return out;
}

struct Defaults {
  std::string kernel;
  std::string methods;
  std::string sizes;
  Index n_y;
  std::string dims;
  KeyValues params;
};

Defaults defaults_for(Experiment e) {
  switch (e) {
    case Experiment::Cluster:
      return {"gaussian", "greedy,sharp,kmeans,balanced-random", "1024", 128, "2",
              {{"modes", "5"}, {"sharp_eps", "1e-10"}, {"sharp_maxiter", "200"}, {"kmeans_maxiter", "300"}}};
    case Experiment::Mnist:
      return {"matern-l1", "greedy,random", "0", 2000, "784", {{"delta", "1e-3"}, {"n_test", "0"}, {"erfinv", "0"}}};
    case Experiment::Ot:
      return {"matern-l1", "cot,cot-ms", "256,512,1024", 0, "2,10",
              {{"cluster_size", "256"}, {"n_test", "1024"}, {"erfinv", "1"}}};
    case Experiment::Bachelier:
      return {"gaussian", "pi,nw,ref", "512", 0, "1",
              {{"strike", "0"}, {"pi_eps", "1e-12"}, {"pi_maxiter", "200"}, {"pi_euclidean", "0"},
               {"extrapolation_kernel", "matern-l1"}}};
    case Experiment::Conditional:
      return {"matern-l1", "sampler", "512", 0, "1",
              {{"sweep_from", "-1"}, {"sweep_to", "1"}, {"sweep_step", "0.4"}, {"samples", "256"},
               {"slope", "2"}, {"noise", "0.3"}}};
  }
  return {};
}

std::string num(double v) { return format_double(v); }
std::string num(Index v) { return std::to_string(v); }

Matrix xy(const std::vector<double>& x, const std::vector<double>& y) {
  Matrix m(static_cast<Index>(x.size()), 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    m(static_cast<Index>(i), 0) = x[i];
    m(static_cast<Index>(i), 1) = y[i];
  }
  return m;
}

Matrix first_two_columns(const PointSet& p) {
  Matrix m = Matrix::Zero(p.size(), 2);
  m.leftCols(std::min<Index>(2, p.dim())) = p.matrix().leftCols(std::min<Index>(2, p.dim()));
  return m;
}

IndexList random_subset(Index n, Index k, std::uint64_t seed) {
  IndexList idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::mt19937_64 rng(seed);
  // partial Fisher-Yates with explicit draws so the result does not depend on std::shuffle
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

LabelledImages truncate(LabelledImages d, Index n_train, Index n_test) {
  if (n_train > 0 && n_train < d.train.pixels.size()) {
    IndexList idx(static_cast<std::size_t>(n_train));
    std::iota(idx.begin(), idx.end(), Index{0});
    d.train.pixels = d.train.pixels.select(idx);
    d.train_labels.resize(static_cast<std::size_t>(n_train));
  }
  if (n_test > 0 && n_test < d.test.pixels.size()) {
    IndexList idx(static_cast<std::size_t>(n_test));
    std::iota(idx.begin(), idx.end(), Index{0});
    d.test.pixels = d.test.pixels.select(idx);
    d.test_labels.resize(static_cast<std::size_t>(n_test));
  }
  return d;
}

}  // namespace

Experiment parse_experiment(const std::string& tag) {
  if (tag == "cluster") return Experiment::Cluster;
  if (tag == "mnist") return Experiment::Mnist;
  if (tag == "ot") return Experiment::Ot;
  if (tag == "bachelier") return Experiment::Bachelier;
  if (tag == "conditional") return Experiment::Conditional;
  throw ConfigError("unknown experiment '" + tag + "'");
}

std::string experiment_tag(Experiment e) {
  switch (e) {
    case Experiment::Cluster: return "cluster";
    case Experiment::Mnist: return "mnist";
    case Experiment::Ot: return "ot";
    case Experiment::Bachelier: return "bachelier";
    case Experiment::Conditional: return "conditional";
  }
  return "";
}

double ExperimentConfig::real(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw ConfigError("config: no parameter '" + key + "'");
  return to_real(key, it->second);
}

Index ExperimentConfig::integer(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw ConfigError("config: no parameter '" + key + "'");
  return to_index(key, it->second);
}

ExperimentConfig make_config(Experiment experiment, const KeyValues& kv) {
  Defaults d = defaults_for(experiment);
  ExperimentConfig c;
  c.experiment = experiment;
  c.kernel = d.kernel;
  std::string methods = d.methods, sizes = d.sizes, dims = d.dims;
  c.n_y = d.n_y;
  c.params = d.params;
  for (const auto& [key, value] : kv) {
    if (key == "experiment") {
      if (parse_experiment(value) != experiment) throw ConfigError("config is for experiment '" + value + "'");
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(to_index(key, value));
    } else if (key == "kernel") {
      c.kernel = value;
    } else if (key == "methods") {
      methods = value;
    } else if (key == "sizes" || key == "n_x" || key == "n") {
      sizes = value;
    } else if (key == "n_y" || key == "m") {
      c.n_y = to_index(key, value);
    } else if (key == "dims" || key == "d") {
      dims = value;
    } else if (key == "timing") {
      c.timing = to_index(key, value) != 0;
    } else if (c.params.count(key)) {
      c.params[key] = value;
    } else {
      throw ConfigError("config: unknown key '" + key + "' for experiment " + experiment_tag(experiment));
    }
  }
  c.methods = split_list(methods);
  if (c.methods.empty()) throw ConfigError("config: no methods");
  c.sizes = index_list("sizes", sizes);
  c.dims = index_list("dims", dims);
  for (Index s : c.sizes) {
    if (s < 0 || (s == 0 && experiment != Experiment::Mnist)) throw ConfigError("config: sizes must be positive");
  }
  for (Index s : c.dims) {
    if (s <= 0) throw ConfigError("config: dims must be positive");
  }
  if ((experiment == Experiment::Cluster || experiment == Experiment::Mnist) && c.n_y <= 0) {
    throw ConfigError("config: n_y must be positive");
  }
  try {
    make_kernel(c.kernel);
  } catch (const Error&) {
    throw ConfigError("config: unknown kernel '" + c.kernel + "'");
  }
  for (const auto& [key, value] : c.params) {
    if (key.ends_with("kernel")) {
      try {
        make_kernel(value);
      } catch (const Error&) {
        throw ConfigError("config: unknown kernel '" + value + "'");
      }
    } else {
      to_real(key, value);
    }
  }
  return c;
}

ExperimentConfig load_config(Experiment experiment, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return make_config(experiment, read_key_values(in));
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

double ResultTable::number(std::size_t row, const std::string& column) const {
  return std::stod(text(row, column));
}

const std::string& ResultTable::text(std::size_t row, const std::string& column) const {
  auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw InvalidArgument("no column '" + column + "'");
  return rows.at(row).at(static_cast<std::size_t>(it - columns.begin()));
}

std::vector<std::size_t> ResultTable::rows_of(const std::string& method) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].empty() && rows[i][0] == method) out.push_back(i);
  }
  return out;
}

void write_table(std::ostream& os, const ResultTable& t) {
  for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << row[j];
    os << '\n';
  }
}

void write_outputs(const fs::path& dir, const ExperimentOutput& out) {
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "results.csv", std::ios::binary);
    if (!f) throw DataError("cannot write " + (dir / "results.csv").string());
    write_table(f, out.table);
  }
  for (const auto& [name, m] : out.plots) {
    std::ofstream f(dir / (name + ".plotdata"), std::ios::binary);
    if (!f) throw DataError("cannot write plot data " + name);
    f << "x,y\n";
    write_csv(f, m);
  }
}

ExperimentOutput run_experiment(const ExperimentConfig& c) {
  switch (c.experiment) {
    case Experiment::Cluster: return cluster_benchmark(c);
    case Experiment::Mnist: return mnist_classify(c);
    case Experiment::Ot: return ot_benchmark(c);
    case Experiment::Bachelier: return bachelier_benchmark(c);
    case Experiment::Conditional: return conditional_demo(c);
  }
  throw ConfigError("unknown experiment");
}

// ---------------------------------------------------------------------------

ExperimentOutput cluster_benchmark(const ExperimentConfig& c) {
  ExperimentOutput out;
  out.table.columns = {"method", "N_X", "N_Y", "exec_time", "inertia", "MMD"};
  const Index n = c.sizes.front();
  const Index d = c.dims.front();
  if (c.n_y > n) throw ConfigError("config: n_y exceeds the sample size");
  const PointSet x = gen_blobs(c.integer("modes"), n, d, c.seed);
  const ScaledKernel k = fit_scaling(x, x, c.kernel);
  out.plots["blobs"] = first_two_columns(x);

  std::optional<ClusterModel> greedy;
  for (const auto& method : c.methods) {
    const auto t0 = Clock::now();
    std::optional<ClusterModel> model;
    if (method == "greedy") {
      model = greedy_discrepancy_clusters(k, x, c.n_y);
      greedy = model;
    } else if (method == "sharp") {
      const PointSet y0 = greedy ? greedy->centroids() : greedy_discrepancy_clusters(k, x, c.n_y).centroids();
      model = sharp_discrepancy(k, x, y0, c.real("sharp_eps"), c.integer("sharp_maxiter"));
    } else if (method == "kmeans") {
      model = kmeans_baseline(x, c.n_y, c.integer("kmeans_maxiter"), c.seed);
    } else if (method == "balanced-random") {
      IndexList idx = random_subset(n, c.n_y, stream_seed(c.seed, 7));
      model = balanced_model(x, x.select(idx), k, idx);
    } else {
      throw ConfigError("cluster: unknown method '" + method + "'");
    }
    const double elapsed = seconds_since(t0);
    const ClusterMetrics m = metrics(*model, x, k);
    out.table.rows.push_back({method, num(n), num(c.n_y), num(c.timing ? elapsed : 0.0), num(m.inertia), num(m.mmd)});
    out.plots["centroids_" + method] = first_two_columns(model->centroids());
  }
  return out;
}

// ---------------------------------------------------------------------------

Matrix log_label_targets(const std::vector<std::uint8_t>& labels, double delta, Index classes) {
  Matrix p = one_hot(labels, classes).cwiseMax(delta).cwiseMin(1.0 - delta);
  p.array().colwise() /= p.rowwise().sum().array();
  return p.array().log().matrix();
}

double classification_accuracy(const ScaledKernel& k, const LabelledImages& data, const IndexList& centers,
                               double delta) {
  std::vector<std::uint8_t> labels;
  labels.reserve(centers.size());
  for (Index i : centers) labels.push_back(data.train_labels[static_cast<std::size_t>(i)]);
  const Regressor r = fit(k, data.train.pixels.select(centers), log_label_targets(labels, delta));
  const Matrix scores = predict(r, data.test.pixels);
  Index hits = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    Index arg = 0;
    scores.row(i).maxCoeff(&arg);
    if (arg == data.test_labels[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scores.rows());
}

IndexList select_centers(const std::string& method, const ScaledKernel& k, const LabelledImages& data, Index n,
                         std::uint64_t seed, double delta) {
  const Index total = data.train.pixels.size();
  if (n > total) throw ConfigError("mnist: n_y exceeds the training set size");
  if (method == "greedy") return *greedy_discrepancy_clusters(k, data.train.pixels, n).source_indices();
  if (method == "function") {
    return *greedy_function_clusters(k, data.train.pixels, log_label_targets(data.train_labels, delta), n)
                .source_indices();
  }
  if (method == "random") return random_subset(total, n, stream_seed(seed, 11));
  throw ConfigError("mnist: unknown method '" + method + "'");
}

ExperimentOutput mnist_classify(const ExperimentConfig& c) {
  ExperimentOutput out;
  out.table.columns = {"method", "N_X", "N_Y", "exec_time", "score"};
  const fs::path dir = c.mnist_dir ? *c.mnist_dir : bundled_digits_dir();
  const LabelledImages data = truncate(load_mnist(dir), c.sizes.front(), c.integer("n_test"));
  const double delta = c.real("delta");
  ScalingOptions scaling;
  scaling.use_erfinv = c.integer("erfinv") != 0;
  const ScaledKernel k = fit_scaling(data.train.pixels, data.train.pixels, c.kernel, scaling);
  const Index n_y = std::min(c.n_y, data.train.pixels.size());
  for (const auto& method : c.methods) {
    const auto t0 = Clock::now();
    const IndexList centers = select_centers(method, k, data, n_y, c.seed, delta);
    const double score = classification_accuracy(k, data, centers, delta);
    const double elapsed = seconds_since(t0);
    out.table.rows.push_back({method, num(data.train.pixels.size()), num(n_y), num(c.timing ? elapsed : 0.0),
                              num(score)});
  }
  return out;
}

// ---------------------------------------------------------------------------

Matrix ot_target_map(const PointSet& x) {
  Matrix m = x.matrix();
  for (Index i = 0; i < m.rows(); ++i) m.row(i) *= m.row(i).squaredNorm();
  return m;
}

OtInstance make_ot_instance(Index n, Index d, std::uint64_t seed, Index n_test) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  auto draw = [&](Index rows) {
    RowMatrix m(rows, d);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < d; ++j) m(i, j) = uni(rng);
    }
    return PointSet(std::move(m));
  };
  OtInstance inst;
  inst.x = draw(n);
  const Matrix sx = ot_target_map(inst.x);
  const IndexList perm = random_subset(n, n, stream_seed(seed, 3));
  inst.y = PointSet::from(select_rows(sx, perm));
  inst.z = draw(n_test);
  inst.sz = ot_target_map(inst.z);
  return inst;
}

double ot_mse(const Eigen::Ref<const Matrix>& predicted, const Eigen::Ref<const Matrix>& truth) {
  return (predicted - truth).rowwise().squaredNorm().mean();
}

Matrix ot_predict(const std::string& method, const OtInstance& inst, const std::string& kernel, Index cluster_size,
                  std::uint64_t seed, bool erfinv) {
  ScalingOptions scaling;
  scaling.use_erfinv = erfinv;
  const ScaledKernel k = fit_scaling(inst.x, inst.x, kernel, scaling);
  if (method == "cot") {
    SampleMapOptions opts;
    opts.fit_inverse = false;
    opts.euclidean_cost = true;
    return generate(sample_map(k, inst.x, inst.y, opts), inst.z);
  }
  if (method == "cot-ms" || method == "cot-ms-1") {
    const Index m = method == "cot-ms-1" ? 1 : std::max<Index>(1, inst.x.size() / cluster_size);
    MultiscaleTransportOptions opts;
    opts.match.seed = seed;
    return fit_multiscale_transport(inst.x, inst.y, m, k, refit_local_kernel(k), opts)(inst.z);
  }
  throw ConfigError("ot: unknown method '" + method + "'");
}

ExperimentOutput ot_benchmark(const ExperimentConfig& c) {
  ExperimentOutput out;
  out.table.columns = {"method", "N", "D", "mse", "time"};
  const Index n_test = c.integer("n_test");
  for (Index d : c.dims) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> curves;
    for (Index n : c.sizes) {
      const OtInstance inst = make_ot_instance(n, d, stream_seed(c.seed, static_cast<std::uint64_t>(n * 1000 + d)),
                                               n_test);
      for (const auto& method : c.methods) {
        const auto t0 = Clock::now();
        const Matrix pred = ot_predict(method, inst, c.kernel, c.integer("cluster_size"), c.seed, c.integer("erfinv") != 0);
        const double elapsed = seconds_since(t0);
        const double mse = ot_mse(pred, inst.sz);
        out.table.rows.push_back({method, num(n), num(d), num(mse), num(c.timing ? elapsed : 0.0)});
        curves[method].first.push_back(static_cast<double>(n));
        curves[method].second.push_back(mse);
      }
    }
    for (const auto& [method, curve] : curves) {
      out.plots["mse_" + method + "_d" + std::to_string(d)] = xy(curve.first, curve.second);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

BachelierRun bachelier_run(const std::string& method, Index n, Index d, std::uint64_t seed, const std::string& kernel,
                           const std::string& extrapolation_kernel, double strike, double eps, Index maxiter, bool euclidean_reindex) {
  BachelierRun run;
  run.basket = make_basket(d, stream_seed(seed, 1), 0.2, strike);
  run.x = run.basket.sample(n, run.basket.t1, stream_seed(seed, 2));
  run.y = run.basket.evolve(run.x, run.basket.t2 - run.basket.t1, stream_seed(seed, 3));
  run.z = run.basket.sample(n, run.basket.t1, stream_seed(seed, 4));
  run.reference = run.basket.conditional_payoff(run.z);
  const Matrix py = run.basket.payoff(run.y);
  const ScaledKernel kx = fit_scaling(run.x, run.x, extrapolation_kernel);

  if (method == "ref") {
    const ScaledKernel ky = fit_scaling(run.y, run.y, extrapolation_kernel);
    run.estimate = predict(fit(ky, run.y, py), run.z);
  } else {
    Matrix fx;
    const PointSet xy_all = vstack(run.x, run.y);
    const ScaledKernel kxy = fit_scaling(xy_all, xy_all, kernel);
    if (method == "pi") {
      PiOptions opts;
      opts.euclidean_reindex = euclidean_reindex;
      PiResult pi = pi_algorithm(kxy, run.x, run.y, eps, maxiter, opts);
      run.objective = pi.objective;
      fx = conditional_expectation(pi.pi, py);
    } else if (method == "nw") {
      fx = conditional_expectation(transition_nw(kxy, run.x, run.y), py);
    } else {
      throw ConfigError("bachelier: unknown method '" + method + "'");
    }
    run.estimate = predict(fit(kx, run.x, fx), run.z);
  }
  run.score = (run.reference - run.estimate).norm() / (run.reference.norm() + run.estimate.norm());
  return run;
}

ExperimentOutput bachelier_benchmark(const ExperimentConfig& c) {
  ExperimentOutput out;
  out.table.columns = {"method", "N", "D", "score", "time"};
  for (Index d : c.dims) {
    for (Index n : c.sizes) {
      for (const auto& method : c.methods) {
        const auto t0 = Clock::now();
        const BachelierRun run = bachelier_run(method, n, d, c.seed, c.kernel, c.params.at("extrapolation_kernel"),
                                               c.real("strike"), c.real("pi_eps"),
                                               c.integer("pi_maxiter"), c.integer("pi_euclidean") != 0);
        const double elapsed = seconds_since(t0);
        out.table.rows.push_back({method, num(n), num(d), num(run.score), num(c.timing ? elapsed : 0.0)});
        const std::string tag = "_n" + std::to_string(n) + "_d" + std::to_string(d);
        const Vector b = run.basket.basket(run.z);
        std::vector<double> bx(b.data(), b.data() + b.size());
        std::vector<double> est(run.estimate.data(), run.estimate.data() + run.estimate.rows());
        out.plots["bachelier_" + method + tag] = xy(bx, est);
        if (!out.plots.count("bachelier_reference" + tag)) {
          std::vector<double> ref(run.reference.data(), run.reference.data() + run.reference.rows());
          out.plots["bachelier_reference" + tag] = xy(bx, ref);
        }
        if (!run.objective.empty()) {
          std::vector<double> it(run.objective.size());
          std::iota(it.begin(), it.end(), 0.0);
          out.plots["pi_objective" + tag] = xy(it, run.objective);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput conditional_demo(const ExperimentConfig& c) {
  ExperimentOutput out;
  const Index n = c.sizes.front();
  const Index dy = c.dims.front();
  const double slope = c.real("slope");
  const double noise = c.real("noise");
  std::mt19937_64 rng(stream_seed(c.seed, 1));
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix x(n, 1), y(n, dy);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = uni(rng);
    for (Index j = 0; j < dy; ++j) y(i, j) = slope * x(i, 0) + noise * normal(rng);
  }
  ConditionalOptions opts;
  opts.seed = stream_seed(c.seed, 2);
  const ConditionalSampler sampler = conditional_sampler(PointSet(x), PointSet(y), make_kernel(c.kernel), opts);

  out.table.columns = {"condition", "sample"};
  for (Index j = 0; j < dy; ++j) out.table.columns.push_back("y" + std::to_string(j));
  const double from = c.real("sweep_from"), to = c.real("sweep_to"), step = c.real("sweep_step");
  if (!(step > 0.0)) throw ConfigError("conditional: sweep_step must be positive");
  const Index count = c.integer("samples");
  std::vector<double> conds, means;
  for (Index s = 0;; ++s) {
    const double cond = from + static_cast<double>(s) * step;
    if (cond > to + 1e-9 * step) break;
    const double point[1] = {cond};
    const Matrix draws = sampler.sample(point, count, stream_seed(c.seed, 100 + static_cast<std::uint64_t>(s)));
    for (Index i = 0; i < draws.rows(); ++i) {
      std::vector<std::string> row = {num(cond), num(i)};
      for (Index j = 0; j < dy; ++j) row.push_back(num(draws(i, j)));
      out.table.rows.push_back(std::move(row));
    }
    conds.push_back(cond);
    means.push_back(draws.col(0).mean());
  }
  out.plots["conditional_means"] = xy(conds, means);
  out.plots["training"] = xy(std::vector<double>(x.data(), x.data() + n),
                             [&] {
                               std::vector<double> v(static_cast<std::size_t>(n));
                               for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = y(i, 0);
                               return v;
                             }());
  return out;
}

}  // namespace rkhs
