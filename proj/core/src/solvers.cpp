#include "rkhs/solvers.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rkhs {

bool is_injective(const Assignment& sigma, Index n) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (Index v : sigma) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

Assignment identity_assignment(Index n) {
  Assignment s(static_cast<std::size_t>(n));
  std::iota(s.begin(), s.end(), Index{0});
  return s;
}

Assignment inverse_permutation(const Assignment& sigma) {
  const auto n = static_cast<Index>(sigma.size());
  if (!is_injective(sigma, n)) throw InvalidArgument("inverse_permutation: not a permutation");
  Assignment inv(sigma.size());
  for (Index i = 0; i < n; ++i) inv[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])] = i;
  return inv;
}

double assignment_cost(const Eigen::Ref<const Matrix>& c, const Assignment& sigma) {
  if (static_cast<Index>(sigma.size()) != c.rows()) throw DimensionError("assignment_cost: size mismatch");
  double total = 0.0;
  for (Index i = 0; i < c.rows(); ++i) total += c(i, sigma[static_cast<std::size_t>(i)]);
  return total;
}

IndexList greedy_search(Index n_x, const SetScore& d, Index n_y, Index m, const IndexList& initial) {
  if (n_y < 1 || n_y > n_x) throw InvalidArgument("greedy_search: need 1 <= N_Y <= N_X");
  if (m < 1) throw InvalidArgument("greedy_search: M must be >= 1");
  if (!d) throw InvalidArgument("greedy_search: empty score functional");
  if (static_cast<Index>(initial.size()) > n_y) throw InvalidArgument("greedy_search: initial set larger than N_Y");

  std::vector<char> taken(static_cast<std::size_t>(n_x), 0);
  IndexList selected;
  selected.reserve(static_cast<std::size_t>(n_y));
  for (Index i : initial) {
    if (i < 0 || i >= n_x || taken[static_cast<std::size_t>(i)]) {
      throw InvalidArgument("greedy_search: initial indices must be valid and distinct");
    }
    taken[static_cast<std::size_t>(i)] = 1;
    selected.push_back(i);
  }

  std::vector<double> scores(static_cast<std::size_t>(n_x));
  IndexList candidates;
  while (static_cast<Index>(selected.size()) < n_y) {
    d(selected, scores);
    candidates.clear();
    for (Index i = 0; i < n_x; ++i) {
      if (!taken[static_cast<std::size_t>(i)]) candidates.push_back(i);
    }
    const auto take = static_cast<std::size_t>(
        std::min<Index>(m, n_y - static_cast<Index>(selected.size())));
    auto better = [&](Index a, Index b) {
      const double sa = scores[static_cast<std::size_t>(a)];
      const double sb = scores[static_cast<std::size_t>(b)];
      if (sa != sb) return sa > sb;
      return a < b;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), better);
    for (std::size_t t = 0; t < take; ++t) {
      taken[static_cast<std::size_t>(candidates[t])] = 1;
      selected.push_back(candidates[t]);
    }
  }
  return selected;
}

Assignment lsap_exact(const Eigen::Ref<const Matrix>& c) {
  const Index rows = c.rows();
  const Index cols = c.cols();
  if (rows > cols) throw DimensionError("lsap_exact: more rows than columns");
  if (!c.allFinite()) throw InvalidArgument("lsap_exact: non-finite cost entry");
  if (rows == 0) return {};

  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is a virtual source.
  std::vector<double> u(static_cast<std::size_t>(rows + 1), 0.0);
  std::vector<double> v(static_cast<std::size_t>(cols + 1), 0.0);
  std::vector<Index> p(static_cast<std::size_t>(cols + 1), 0);
  std::vector<Index> way(static_cast<std::size_t>(cols + 1), 0);
  std::vector<double> minv(static_cast<std::size_t>(cols + 1));
  std::vector<char> used(static_cast<std::size_t>(cols + 1));

  for (Index i = 1; i <= rows; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= cols; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) continue;
        const double cur = c(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[uj];
        if (cur < minv[uj]) {
          minv[uj] = cur;
          way[uj] = j0;
        }
        if (minv[uj] < delta) {
          delta = minv[uj];
          j1 = j;
        }
      }
      for (Index j = 0; j <= cols; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) {
          u[static_cast<std::size_t>(p[uj])] += delta;
          v[uj] -= delta;
        } else {
          minv[uj] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment sigma(static_cast<std::size_t>(rows), -1);
  for (Index j = 1; j <= cols; ++j) {
    const Index r = p[static_cast<std::size_t>(j)];
    if (r != 0) sigma[static_cast<std::size_t>(r - 1)] = j - 1;
  }
  return sigma;
}

Sweep parse_sweep(const std::string& tag) {
  if (tag == "full") return Sweep::Full;
  if (tag == "bipartite") return Sweep::Bipartite;
  throw InvalidArgument("unknown sweep strategy '" + tag + "'");
}

namespace {

struct SwapChecker {
  const GainOracle& s;
  bool enabled;
  double current = 0.0;

  void start(const Assignment& sigma) {
    if (enabled) current = s.cost(sigma);
  }

  void check(double gain, const Assignment& sigma) {
    if (!enabled) return;
    const double next = s.cost(sigma);
    const double actual = current - next;
    const double tol = 1e-8 * std::max({1.0, std::abs(current), std::abs(next)});
    if (!(next < current) || std::abs(actual - gain) > tol) {
      throw Error("permutation_descent: gain oracle disagrees with cost (claimed " +
                  std::to_string(gain) + ", actual " + std::to_string(actual) + ")");
    }
    current = next;
  }
};

}  // namespace

DescentResult permutation_descent(const GainOracle& s, Assignment sigma0, const DescentOptions& options) {
  if (!s.gain) throw InvalidArgument("permutation_descent: empty gain oracle");
  const auto n = static_cast<Index>(sigma0.size());
  const Index ib = s.i_begin;
  const Index ie = s.i_end < 0 ? n : s.i_end;
  const Index jb = s.j_begin;
  const Index je = s.j_end < 0 ? n : s.j_end;
  if (ib < 0 || jb < 0 || ie > n || je > n || ib > ie || jb > je) {
    throw InvalidArgument("permutation_descent: index ranges outside sigma");
  }

  const double cap = 10.0 * static_cast<double>(std::max<Index>(ie - ib, 1)) *
                     static_cast<double>(std::max<Index>(je - jb, 1));
  SwapChecker checker{s, options.debug && static_cast<bool>(s.cost)};
  checker.start(sigma0);

  DescentResult result;
  result.sigma = std::move(sigma0);
  Assignment& sigma = result.sigma;

  auto apply = [&](Index i, Index j, double g) {
    std::swap(sigma[static_cast<std::size_t>(i)], sigma[static_cast<std::size_t>(j)]);
    if (s.on_swap) s.on_swap(i, j, g, sigma);
    checker.check(g, sigma);
    ++result.swaps;
  };

  auto j_start = [&](Index i) { return options.sweep == Sweep::Full ? std::max(jb, i + 1) : jb; };

  bool improved = true;
  while (improved) {
    improved = false;
    ++result.sweeps;
    if (options.best_per_sweep) {
      double best = options.min_gain;
      Index bi = -1, bj = -1;
      for (Index i = ib; i < ie; ++i) {
        for (Index j = j_start(i); j < je; ++j) {
          if (i == j) continue;
          const double g = s.gain(i, j, sigma);
          if (g > best) {
            best = g;
            bi = i;
            bj = j;
          }
        }
      }
      if (bi >= 0) {
        apply(bi, bj, best);
        improved = true;
      }
    } else {
      for (Index i = ib; i < ie; ++i) {
        for (Index j = j_start(i); j < je; ++j) {
          if (i == j) continue;
          const double g = s.gain(i, j, sigma);
          if (g > options.min_gain) {
            apply(i, j, g);
            improved = true;
          }
        }
      }
    }
    if (static_cast<double>(result.swaps) >= cap ||
        (improved && options.max_sweeps > 0 && result.sweeps >= options.max_sweeps)) {
      result.converged = false;
      break;
    }
  }
  return result;
}

ExplicitDescentResult explicit_descent(const Functional& j, const GradientFunctional& grad, Matrix x0,
                                       double eps, Index maxiter, const ExplicitDescentOptions& options) {
  if (!j || !grad) throw InvalidArgument("explicit_descent: empty functional");
  ExplicitDescentResult result;
  result.x = std::move(x0);
  Matrix& x = result.x;

  Matrix g = grad(x);
  if (g.rows() != x.rows() || g.cols() != x.cols()) throw DimensionError("explicit_descent: gradient shape");
  if (options.debug) {
    // Central-difference spot check of the supplied gradient.
    const double h = 1e-6;
    for (Index i = 0; i < std::min<Index>(x.size(), 8); ++i) {
      Matrix xp = x, xm = x;
      xp.data()[i] += h;
      xm.data()[i] -= h;
      const double fd = (j(xp) - j(xm)) / (2.0 * h);
      if (std::abs(fd - g.data()[i]) > 1e-4 * std::max(1.0, std::abs(fd))) {
        throw Error("explicit_descent: gradient inconsistent with functional");
      }
    }
  }
  double gn = g.norm();
  double jx = j(x);
  result.objective.push_back(jx);
  double step = options.initial_step;

  while (result.iterations < maxiter) {
    if (gn <= eps) {
      result.converged = true;
      break;
    }
    int evals = 0;
    auto phi = [&](double lam) {
      ++evals;
      return grad(x - lam * g).norm();
    };

    double lam = 0.0;
    double b = step;
    double fb = phi(b);
    if (!(fb < gn)) {
      // Minimum of |grad J| lies inside [0, step] or the direction is useless for it.
      std::uintmax_t iters = static_cast<std::uintmax_t>(std::max(options.max_line_evaluations - evals, 1));
      const auto best = boost::math::tools::brent_find_minima(phi, 0.0, b, 26, iters);
      lam = best.second < gn && best.first > 0.0 ? best.first : 0.5 * step;
    } else {
      double a = 0.0;
      double c = 2.0 * b;
      double fc = phi(c);
      while (fc < fb && evals < options.max_line_evaluations / 2) {
        a = b;
        b = c;
        fb = fc;
        c *= 2.0;
        fc = phi(c);
      }
      const int budget = std::max(options.max_line_evaluations - evals, 1);
      std::uintmax_t iters = static_cast<std::uintmax_t>(budget);
      const auto best = boost::math::tools::brent_find_minima(phi, a, c, 26, iters);
      lam = best.second <= fb ? best.first : b;
    }

    Matrix next = x - lam * g;
    double jn = j(next);
    int halvings = 0;
    while (!(jn <= jx + 1e-12) && halvings < options.max_halvings) {
      lam *= 0.5;
      next = x - lam * g;
      jn = j(next);
      ++halvings;
    }
    if (!(jn <= jx + 1e-12)) {
      result.stalled = true;
      break;
    }
    x = std::move(next);
    jx = jn;
    g = grad(x);
    gn = g.norm();
    step = lam > 0.0 ? 2.0 * lam : step;
    ++result.iterations;
    result.objective.push_back(jx);
  }
  result.grad_norm = gn;
  if (gn <= eps) result.converged = true;
  return result;
}

}  // namespace rkhs
