#pragma once

#include "rkhs/common.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rkhs {

/// Injective map [0, M) -> [0, N); a permutation when M = N.
using Assignment = IndexList;

bool is_injective(const Assignment& sigma, Index n);
Assignment identity_assignment(Index n);
Assignment inverse_permutation(const Assignment& sigma);
double assignment_cost(const Eigen::Ref<const Matrix>& c, const Assignment& sigma);

// ---------------------------------------------------------------------------
// Greedy search

/// Fills `scores[x]` with d(Y, x) for every candidate x given the current
/// selection Y. Larger is better.
using SetScore = std::function<void(const IndexList& selected, std::span<double> scores)>;

/// Appends, per round, the M remaining candidates with the largest d(Y, .)
/// until N_Y points are selected. Lowest index wins ties. The result starts
/// with `initial`.
IndexList greedy_search(Index n_x, const SetScore& d, Index n_y, Index m = 1,
                        const IndexList& initial = {});

// ---------------------------------------------------------------------------
// Linear sum assignment

/// Exact minimum-cost injective assignment of the M rows of `c` to its N >= M
/// columns (shortest augmenting path with potentials).
Assignment lsap_exact(const Eigen::Ref<const Matrix>& c);

// ---------------------------------------------------------------------------
// Permutation descent

enum class Sweep { Full, Bipartite };

Sweep parse_sweep(const std::string& tag);

struct GainOracle {
  /// s(i, j, sigma) = C(sigma) - C(sigma_ij).
  std::function<double(Index i, Index j, const Assignment& sigma)> gain;
  /// Called after sigma(i) and sigma(j) were exchanged, to refresh cached state.
  std::function<void(Index i, Index j, double gain, const Assignment& sigma)> on_swap;
  /// Optional full cost, used by the debug consistency check.
  std::function<double(const Assignment& sigma)> cost;

  /// Index ranges [i_begin, i_end) x [j_begin, j_end); -1 means the full range.
  Index i_begin = 0, i_end = -1;
  Index j_begin = 0, j_end = -1;
};

struct DescentOptions {
  Sweep sweep = Sweep::Full;
  double min_gain = 1e-12;
  /// Accept only the best swap of each sweep (gain evaluations are independent).
  bool best_per_sweep = false;
  /// Stop after this many sweeps (0 = until no improving swap remains).
  Index max_sweeps = 0;
  bool debug = debug_checks_enabled();
};

struct DescentResult {
  Assignment sigma;
  Index swaps = 0;
  Index sweeps = 0;
  /// False when the swap cap 10 * N_I * N_J was reached.
  bool converged = true;
};

DescentResult permutation_descent(const GainOracle& s, Assignment sigma0,
                                  const DescentOptions& options = {});

// ---------------------------------------------------------------------------
// Descent with explicit gradient

using Functional = std::function<double(const Matrix&)>;
using GradientFunctional = std::function<Matrix(const Matrix&)>;

struct ExplicitDescentOptions {
  int max_line_evaluations = 50;
  /// First trial step; later iterations start from twice the previous accepted step.
  double initial_step = 1e-2;
  int max_halvings = 60;
  bool debug = debug_checks_enabled();
};

struct ExplicitDescentResult {
  Matrix x;
  Index iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  /// True when no step could decrease J any further.
  bool stalled = false;
  std::vector<double> objective;  // J at the start and after every accepted step
};

/// X^{n+1} = X^n - lambda grad J(X^n), lambda from a bracketed Brent minimization of
/// lambda -> |grad J(X^lambda)|. Steps that increase J are halved until they do not.
ExplicitDescentResult explicit_descent(const Functional& j, const GradientFunctional& grad,
                                       Matrix x0, double eps, Index maxiter,
                                       const ExplicitDescentOptions& options = {});

}  // namespace rkhs
