// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "rkhs/experiments.hpp"
#include "rkhs/kernel_ops.hpp"
#include "rkhs/multiscale.hpp"
#include "rkhs/solvers.hpp"
#include "rkhs/transport.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace rkhs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

PointSet uniform(Index n, Index d, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RowMatrix m(n, d);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return PointSet(m);
}

Matrix gaussian_matrix(Index n, Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, d);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<std::vector<double>> sorted_rows(const Eigen::Ref<const Matrix>& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (Index i = 0; i < m.rows(); ++i) rows[i].assign(m.row(i).begin(), m.row(i).end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(double(i) / double(a.size()) - double(j) / double(b.size())));
  }
  return d;
}

double ks_critical(double alpha, std::size_t n, std::size_t m) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) * std::sqrt(double(n + m) / double(n * m));
}

// 1. Extrapolation fit reproduces its targets.
Outcome reproducibility() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<Index> pick_n(2, 64), pick_d(1, 5);
  const std::vector<std::string> families = {"gaussian", "matern-l1"};
  std::vector<int> failures(2, 0);
  std::vector<double> worst(2, 0.0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t f = static_cast<std::size_t>(t % 2);
    const Index n = pick_n(rng), d = pick_d(rng);
    const PointSet x = uniform(n, d, rng, -1.0, 1.0);
    const Matrix fx = gaussian_matrix(n, 2, rng);
    const ScaledKernel k = fit_scaling(x, x, families[f]);
    double rel = 0.0;
    try {
      rel = (predict(fit(k, x, fx), x) - fx).norm() / fx.norm();
    } catch (const Error&) {
      rel = std::numeric_limits<double>::infinity();
    }
    if (!(rel <= 1e-8)) ++failures[f];
    worst[f] = std::max(worst[f], rel);
  }
  std::ostringstream os;
  os << "failures gaussian=" << failures[0] << "/50 (worst " << fmt(worst[0]) << "), matern-l1=" << failures[1]
     << "/50 (worst " << fmt(worst[1]) << ")";
  return {failures[0] == 0 && failures[1] == 0, os.str()};
}

// 2. Discrepancy identities.
Outcome mmd_properties() {
  std::mt19937_64 rng(2);
  bool ok = true;
  double self = 0.0, single = 0.0;
  for (const std::string family : {"gaussian", "matern-l1"}) {
    for (int t = 0; t < 20; ++t) {
      const PointSet x = uniform(30, 3, rng), z = uniform(17, 3, rng);
      const ScaledKernel k = fit_scaling(x, z, family);
      self = std::max(self, mmd(k, x, x));
      if (mmd(k, x, z) != mmd(k, z, x)) ok = false;
      const PointSet a = x.select(std::vector<Index>{0}), b = z.select(std::vector<Index>{0});
      const double direct = k(a.point(0), a.point(0)) + k(b.point(0), b.point(0)) - 2.0 * k(a.point(0), b.point(0));
      single = std::max(single, std::abs(mmd(k, a, b) - direct));
    }
  }
  ok = ok && self <= 1e-12 && single <= 1e-12;
  return {ok, "max d(X,X)=" + fmt(self) + ", singleton error=" + fmt(single) + ", symmetry " +
                  (ok ? "exact" : "checked")};
}

// 3. Exact assignment against enumeration.
Outcome lsap() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    Matrix c(6, 6);
    for (Index i = 0; i < 36; ++i) c.data()[i] = u(rng);
    std::vector<Index> p(6);
    std::iota(p.begin(), p.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double s = 0.0;
      for (Index i = 0; i < 6; ++i) s += c(i, p[i]);
      best = std::min(best, s);
    } while (std::next_permutation(p.begin(), p.end()));
    if (std::abs(assignment_cost(c, lsap_exact(c)) - best) > 1e-12) ++bad;
  }
  return {bad == 0, std::to_string(bad) + "/1000 mismatches"};
}

// 4. Gradient operator against central differences, Laplacian symmetry and sign.
Outcome gradient_laplacian() {
  std::mt19937_64 rng(4);
  int bad = 0, checked = 0;
  for (const std::string family : {"gaussian", "matern-l1"}) {
    for (int t = 0; t < 5; ++t) {
      const Index d = 1 + t % 3;
      const PointSet x = uniform(24, d, rng);
      const Matrix fx = gaussian_matrix(24, 2, rng);
      const Regressor r = fit(fit_scaling(x, x, family), x, x, fx, 1e-6);
      const PointSet z = uniform(10, d, rng, 0.05, 0.95);
      const Tensor3 g = gradient(r, z);
      const double h = 1e-6;
      for (Index i = 0; i < z.size(); ++i) {
        for (Index j = 0; j < d; ++j) {
          RowMatrix zp = z.matrix().row(i), zm = zp;
          zp(0, j) += h;
          zm(0, j) -= h;
          const Matrix fd = (predict(r, PointSet(zp)) - predict(r, PointSet(zm))) / (2.0 * h);
          for (Index l = 0; l < 2; ++l) {
            ++checked;
            if (std::abs(g(i, j, l) - fd(0, l)) > std::max(1e-4, 1e-3 * std::abs(fd(0, l)))) ++bad;
          }
        }
      }
    }
  }
  double asym = 0.0, pos = -std::numeric_limits<double>::infinity();
  for (const std::string family : {"gaussian", "matern-l1"}) {
    const PointSet x = uniform(40, 2, rng);
    const Matrix l = laplacian_operator(fit_scaling(x, x, family), x);
    asym = std::max(asym, (l - l.transpose()).cwiseAbs().maxCoeff());
    for (int t = 0; t < 20; ++t) {
      const Vector v = gaussian_matrix(40, 1, rng).col(0);
      pos = std::max(pos, v.dot(l * v) / v.squaredNorm());
    }
  }
  const bool ok = bad == 0 && asym <= 1e-10 && pos <= 1e-8;
  return {ok, std::to_string(bad) + "/" + std::to_string(checked) + " gradient entries off, |L-L^T|=" + fmt(asym) +
                  ", max v'Lv/|v|^2=" + fmt(pos)};
}

// 5. Cluster method ordering on blobs.
Outcome cluster_ordering() {
  int sharp_greedy = 0, greedy_kmeans = 0, kmeans_inertia = 0;
  std::ostringstream os;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const ExperimentConfig c = make_config(Experiment::Cluster, {{"sizes", "1024"},
                                                                 {"n_y", "128"},
                                                                 {"dims", "2"},
                                                                 {"modes", "5"},
                                                                 {"methods", "greedy,sharp,kmeans,balanced-random"},
                                                                 {"seed", std::to_string(seed)},
                                                                 {"timing", "0"}});
    const ResultTable t = run_experiment(c).table;
    const auto val = [&](const std::string& m, const std::string& col) { return t.number(t.rows_of(m).front(), col); };
    if (val("sharp", "MMD") < val("greedy", "MMD")) ++sharp_greedy;
    if (val("greedy", "MMD") < val("kmeans", "MMD")) ++greedy_kmeans;
    const double ik = val("kmeans", "inertia");
    if (ik <= val("greedy", "inertia") && ik <= val("sharp", "inertia") && ik <= val("balanced-random", "inertia"))
      ++kmeans_inertia;
    os << " seed" << seed << "[mmd sharp=" << fmt(val("sharp", "MMD")) << " greedy=" << fmt(val("greedy", "MMD"))
       << " kmeans=" << fmt(val("kmeans", "MMD")) << " inertia kmeans=" << fmt(ik) << "]";
  }
  const bool ok = sharp_greedy >= 2 && greedy_kmeans >= 2 && kmeans_inertia >= 2;
  return {ok, "votes sharp<greedy " + std::to_string(sharp_greedy) + "/3, greedy<kmeans " +
                  std::to_string(greedy_kmeans) + "/3, kmeans inertia min " + std::to_string(kmeans_inertia) + "/3;" +
                  os.str()};
}

// 6. Digit classification from selected centers.
Outcome classification() {
  const char* env = std::getenv("RKHS_MNIST_DIR");
  const bool full = env != nullptr && *env != '\0';
  // Bundled digits: 300 of 1437 training images stand in for 2000 of 60000.
  const Index n_y = full ? 2000 : 300;
  const double threshold = full ? 0.95 : 0.90;
  int greedy_wins = 0;
  double worst_greedy = 1.0;
  std::ostringstream os;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ExperimentConfig c = make_config(Experiment::Mnist, {{"n_y", std::to_string(n_y)},
                                                         {"methods", "greedy,random"},
                                                         {"seed", std::to_string(seed)},
                                                         {"timing", "0"}});
    if (full) c.mnist_dir = env;
    const ResultTable t = run_experiment(c).table;
    const double g = t.number(t.rows_of("greedy").front(), "score");
    const double r = t.number(t.rows_of("random").front(), "score");
    if (g > r) ++greedy_wins;
    worst_greedy = std::min(worst_greedy, g);
    os << " seed" << seed << "[greedy=" << fmt(g) << " random=" << fmt(r) << "]";
  }
  const bool ok = worst_greedy >= threshold && greedy_wins >= 2;
  return {ok, std::string(full ? "mnist" : "bundled digits") + ", " + std::to_string(n_y) + " centers, threshold " +
                  fmt(threshold) + ", greedy wins " + std::to_string(greedy_wins) + "/3;" + os.str()};
}

// 7. Multiscale reproduction and exact transport.
Outcome multiscale() {
  std::mt19937_64 rng(7);
  const PointSet x = uniform(512, 2, rng, -1.0, 1.0);
  const Matrix fx = gaussian_matrix(512, 2, rng);
  const ScaledKernel k0 = fit_scaling(x, x, "matern-l1");
  const MultiscaleRegressor m = fit_multiscale(k0, refit_local_kernel(k0), x, fx, 8);
  const double repro = (predict_multiscale(m, x) - fx).cwiseAbs().maxCoeff() / fx.cwiseAbs().maxCoeff();

  const PointSet y = PointSet::from(ot_target_map(uniform(512, 2, rng, -0.5, 0.5)));
  const MultiscaleTransport t = fit_multiscale_transport(x, y, 8, k0, refit_local_kernel(k0));
  const Matrix image = t(x);
  const auto a = sorted_rows(image), b = sorted_rows(y.matrix());
  double multiset = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) multiset = std::max(multiset, std::abs(a[i][j] - b[i][j]));

  Matrix cost(512, 512);
  for (Index i = 0; i < 512; ++i)
    for (Index j = 0; j < 512; ++j) cost(i, j) = (x.matrix().row(i) - y.matrix().row(j)).squaredNorm();
  const double global = assignment_cost(cost, lsap_exact(cost));
  const double ms = pairing_cost(x, y, t.target_index());
  const bool ok = repro <= 1e-8 && multiset <= 1e-10 && ms >= global - 1e-9;
  return {ok, "reproduction " + fmt(repro) + ", multiset error " + fmt(multiset) + ", cost multiscale " + fmt(ms) +
                  " vs global " + fmt(global)};
}

// 8. Map recovery improves with N, single-cluster multiscale equals the global map.
Outcome ot_recovery() {
  int decreases = 0;
  std::ostringstream os;
  bool identical = true;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const ExperimentConfig c = make_config(Experiment::Ot, {{"sizes", "256,1024"},
                                                            {"dims", "2"},
                                                            {"methods", "cot"},
                                                            {"seed", std::to_string(seed)},
                                                            {"timing", "0"}});
    const ResultTable t = run_experiment(c).table;
    double small = 0.0, large = 0.0;
    for (std::size_t r : t.rows_of("cot")) (t.number(r, "N") == 256 ? small : large) = t.number(r, "mse");
    if (large < small) ++decreases;
    os << " seed" << seed << "[" << fmt(small) << " -> " << fmt(large) << "]";
    const OtInstance inst = make_ot_instance(256, 2, seed, 256);
    if (ot_predict("cot", inst, c.kernel, 256, seed) != ot_predict("cot-ms-1", inst, c.kernel, 256, seed))
      identical = false;
  }
  return {decreases >= 2 && identical, "mse decreases " + std::to_string(decreases) + "/3, cot-ms C=1 " +
                                           (identical ? "bit-identical" : "differs") + ";" + os.str()};
}

// 9. Transition-matrix iterates and the Bachelier benchmark.
Outcome pi_invariants() {
  const BrownianBasket bb = make_basket(1, 9);
  const PointSet x1 = bb.sample(512, bb.t1, 1);
  const PointSet x2 = bb.evolve(x1, bb.t2 - bb.t1, 2);
  const auto center = [](const PointSet& p) {
    RowMatrix m = p.matrix();
    m.rowwise() -= m.colwise().mean();
    return PointSet(m);
  };
  const PointSet x = center(x1), y = center(x2);
  const ScaledKernel k = fit_scaling(x, y, "gaussian");
  const PiResult r = pi_algorithm(k, x, y, 1e-12, 200);
  double dev = 0.0;
  for (double v : r.constraint_deviation) dev = std::max(dev, v);
  bool monotone = true;
  for (std::size_t i = 1; i < r.objective.size(); ++i)
    if (r.objective[i] > r.objective[i - 1] * (1.0 + 1e-12) + 1e-15) monotone = false;
  const PiResult fixed = pi_algorithm(k, x, x, 1e-12, 200);
  const double ident = (fixed.pi.values - Matrix::Identity(512, 512)).cwiseAbs().maxCoeff();

  double worst = 0.0;
  std::ostringstream os;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const double s = bachelier_run("pi", 512, 1, seed).score;
    worst = std::max(worst, s);
    os << " " << fmt(s);
  }
  const bool ok = dev <= 1e-10 && monotone && ident <= 1e-10 && worst <= 0.1;
  return {ok, "row/col deviation " + fmt(dev) + ", J " + (monotone ? "non-increasing" : "increases") +
                  ", fixed point |Pi-I|=" + fmt(ident) + ", pi scores (seeds 0-2):" + os.str() + " vs 0.1"};
}

// 10. Sampler reproduction and a two-sample test on fresh draws.
Outcome sampler() {
  std::mt19937_64 rng(10);
  const PointSet x = standard_normal(200, 2, 11);
  const PointSet y = uniform(200, 2, rng);
  const SamplerMap s = sample_map(fit_scaling(x, x, "matern-l1"), x, y);
  const Matrix target = y.select(s.sigma()).matrix();
  const double repro = (generate(s, x) - target).norm() / target.norm();

  int passed = 0;
  std::ostringstream os;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::mt19937_64 g(seed);
    std::gamma_distribution<double> gamma(2.0, 1.0);
    RowMatrix train(512, 1);
    for (Index i = 0; i < 512; ++i) train(i, 0) = gamma(g);
    std::vector<double> fresh_y(512);
    for (double& v : fresh_y) v = gamma(g);
    const PointSet latent = standard_normal(512, 1, seed + 100);
    const SamplerMap m = sample_map(fit_scaling(latent, latent, "matern-l1"), latent, PointSet(train));
    const Matrix out = generate(m, standard_normal(512, 1, seed + 200));
    const double d = ks_statistic({out.data(), out.data() + out.rows()}, fresh_y);
    if (d <= ks_critical(0.01, 512, 512)) ++passed;
    os << " " << fmt(d);
  }
  return {repro <= 1e-8 && passed >= 2, "reproduction " + fmt(repro) + ", KS passes " + std::to_string(passed) +
                                            "/3 (D =" + os.str() + ", critical " + fmt(ks_critical(0.01, 512, 512)) +
                                            ")"};
}

// 11. Proportional fitting.
Outcome proportional_fitting() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    Matrix m(8, 8);
    for (Index i = 0; i < 64; ++i) m.data()[i] = u(rng);
    worst = std::max(worst, bistochastic_deviation(ipf(m, 1e-12).values));
  }
  Vector a(8), b(8);
  for (Index i = 0; i < 8; ++i) {
    a(i) = u(rng);
    b(i) = u(rng);
  }
  const Matrix p = ipf(a * b.transpose(), 1e-12).values;
  const double uni = (p - Matrix::Constant(8, 8, 1.0 / 8.0)).cwiseAbs().maxCoeff();
  return {worst <= 1e-8 && uni <= 1e-8, "max sum deviation " + fmt(worst) + ", rank-one distance to uniform " + fmt(uni)};
}

}  // namespace

int main() {
  struct Criterion {
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {reproducibility, 10},   {mmd_properties, 1}, {lsap, 5},      {gradient_laplacian, 10},
      {cluster_ordering, 120}, {classification, 900}, {multiscale, 60}, {ot_recovery, 300},
      {pi_invariants, 120},    {sampler, 60},       {proportional_fitting, 1},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= criteria[i].budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %zu: %s - %s (%.2f s, budget %.0f s%s)\n", i + 1, pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs, criteria[i].budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
