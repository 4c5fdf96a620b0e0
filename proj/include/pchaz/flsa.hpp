#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pchaz/step_function.hpp"

namespace pchaz {

/// Maximal run alpha[start..end] (0-based, inclusive) sharing one level.
struct FusedBlock {
  std::size_t start = 0;
  std::size_t end = 0;
  double level = 0.0;
};

/// Solution of the 1-D fused lasso
///   (1/m) sum_j (y_j - a_j)^2 + lambda * sum_j |a_j - a_{j-1}|.
struct FusedLassoFit {
  double lambda = 0.0;
  std::vector<double> alpha;
  std::vector<FusedBlock> blocks;
  /// 0-based positions i with alpha[i-1] != alpha[i]; the jump sits at grid
  /// point t_{i+1}.
  std::vector<std::size_t> changepoints;

  /// Blocks and change points of an arbitrary vector.
  static FusedLassoFit from_alpha(std::vector<double> alpha, double lambda);
};

/// Value of the fused lasso objective above.
double flsa_objective(std::span<const double> y, std::span<const double> alpha, double lambda);

/// Exact minimiser by dynamic programming over piecewise-linear derivative
/// messages (Johnson's algorithm), O(m). lambda == 0 and m == 1 return y.
FusedLassoFit flsa_solve(std::span<const double> y, double lambda);

/// Change-point count on [lambda, next breakpoint lambda).
struct PathBreakpoint {
  double lambda = 0.0;
  std::size_t changepoint_count = 0;
};

/// Every lambda at which fused blocks merge, starting with lambda = 0.
/// Blocks only ever merge as lambda grows, and between merges each block
/// level moves linearly, so the path is found by agglomeration in O(m log m).
std::vector<PathBreakpoint> flsa_path(std::span<const double> y);

/// Solution at lambda read off the agglomerative path (independent of the
/// dynamic program).
std::vector<double> flsa_path_solution(std::span<const double> y, double lambda);

/// Count implied by the path at lambda.
std::size_t path_count_at(std::span<const PathBreakpoint> path, double lambda);

/// Constant interpolation of the fitted vector on the window, in original
/// time units: level alpha_1 on [t_0, t_2), alpha_j on [t_j, t_{j+1}), so a
/// change point at position i puts a break at t_{i+1}. Levels are divided by
/// the window length. A jump into the last element only affects the single
/// point tau_max and is not represented.
StepFunction interpolate(const FusedLassoFit& fit, const Window& window);

/// Change-point times t_{i+1} of the fit on the window.
std::vector<double> changepoint_times(const FusedLassoFit& fit, const Window& window);

struct LassoOptions {
  double tol = 1e-13;
  std::size_t max_sweeps = 2'000'000;
};

/// Fused lasso solved in its lasso form: unpenalised intercept plus jump
/// coefficients on a centred cumulative design, by coordinate descent.
/// Returns the fitted vector in the original parametrisation. Throws
/// std::runtime_error when the sweep budget is exhausted.
std::vector<double> reparametrized_check(std::span<const double> y, double lambda,
                                         const LassoOptions& options = {});

/// max over 1 <= k <= l <= m of |u_k + ... + u_l| / sqrt(l - k + 1).
double max_normalized_partial_sum(std::span<const double> u);

/// Deterministic elementwise error bound of the fused lasso around a
/// piecewise constant truth, with kappa = max_normalized_partial_sum(y - truth).
std::vector<double> elementwise_bound(std::span<const double> truth, double kappa, double lambda);

/// True iff |alpha_j - truth_j| <= elementwise_bound(...)_j for all j.
/// `y` is the data the fit was computed from.
bool elementwise_bound_check(const FusedLassoFit& fit, std::span<const double> y,
                             std::span<const double> truth, double lambda);

}  // namespace pchaz
