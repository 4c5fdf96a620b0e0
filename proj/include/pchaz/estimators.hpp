#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pchaz/event_data.hpp"
#include "pchaz/step_function.hpp"

namespace pchaz {

struct CoxOptions {
  double tol = 1e-8;        // max-norm of the score at convergence
  int max_iter = 100;
  int max_halvings = 30;
  double beta_guard = 50.0; // |beta_k| beyond this is taken as separation
};

struct CoxFit {
  std::vector<double> beta;
  double log_partial_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Breslow-tie log partial likelihood with left-truncated risk sets.
double cox_log_partial_likelihood(const SurvivalFrame& frame, std::span<const double> beta);
/// Score vector of the same likelihood.
std::vector<double> cox_score(const SurvivalFrame& frame, std::span<const double> beta);

/// Newton-Raphson maximisation of the partial likelihood with step halving.
/// Covariates that are constant over the frame are not identifiable and keep
/// coefficient 0. Separation shows up as converged == false, never a throw.
CoxFit cox_fit(const SurvivalFrame& frame, const CoxOptions& options = {});

/// Right-continuous step estimate of the cumulative hazard, A(0) = 0.
class BreslowCurve {
 public:
  BreslowCurve() = default;
  BreslowCurve(std::vector<double> jump_times, std::vector<double> jump_sizes, double tau);

  const std::vector<double>& jump_times() const { return times_; }
  const std::vector<double>& jump_sizes() const { return sizes_; }
  /// Largest observed time in the sample the curve was fitted on.
  double tau() const { return tau_; }

  double operator()(double t) const;
  /// A at each point of an increasing grid in one pass.
  std::vector<double> evaluate_sorted(std::span<const double> grid) const;

 private:
  std::vector<double> times_;
  std::vector<double> sizes_;
  std::vector<double> cumulative_;
  double tau_ = 0.0;
};

/// Breslow estimator: at each distinct event time a jump of
/// (#events) / sum_{at risk} exp(beta'W). Reduces to Nelson-Aalen for d = 0.
/// Invariant under permutation of the records.
BreslowCurve breslow_fit(const SurvivalFrame& frame, std::span<const double> beta);

/// Empirical (inverse-ECDF) p-quantile of the uncensored times.
double event_time_quantile(const SurvivalFrame& frame, double p);

/// Window from quantiles of the uncensored times.
Window choose_window(const SurvivalFrame& frame, double p_low, double p_high);

/// Sub-intervals of the window on which nobody is at risk.
std::vector<std::pair<double, double>> empty_risk_intervals(const SurvivalFrame& frame,
                                                            const Window& window);

/// Equidistant-grid increments of a cumulative hazard, in rescaled time.
///
/// Time is mapped affinely so the window has length 1. With grid
/// t_j = tau_min + j * scale / m, y_j = m * (A(t_j) - A(t_{j-1})) for
/// j = 1..m, i.e. A is differenced over (t_{j-1}, t_j]. A hazard in original
/// time units is y / scale.
struct IncrementSample {
  Window window;
  std::size_t m = 0;
  std::vector<double> grid;  // m + 1 points
  std::vector<double> y;     // m increments
  double scale = 1.0;
};

IncrementSample build_increments(const BreslowCurve& curve, const Window& window, std::size_t m);

}  // namespace pchaz
