#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pchaz/estimators.hpp"
#include "pchaz/event_data.hpp"
#include "pchaz/flsa.hpp"
#include "pchaz/step_function.hpp"
#include "pchaz/tuning.hpp"

namespace pchaz {

enum class BetaSource {
  none,     // covariates ignored, beta = 0
  fit,      // Cox partial likelihood; empty when the frame has no covariates
  supplied  // taken from FitConfig::beta
};

struct FitConfig {
  std::optional<Window> window;  // explicit window wins over the quantile pair
  double p_low = 0.0;
  double p_high = 0.975;
  std::optional<std::size_t> grid;  // defaults to the number of records
  TuningConfig tuning;
  BetaSource beta_source = BetaSource::fit;
  std::vector<double> beta;
  CoxOptions cox;

  void validate(const SurvivalFrame& frame) const;
};

struct HazardFit {
  StepFunction hazard;      // original time units, negative levels clamped to 0
  StepFunction hazard_raw;  // before clamping
  BreslowCurve cumulative;
  TuningResult tuning;
  std::vector<double> beta;
  std::optional<CoxFit> cox;
  Window window;
  IncrementSample increments;
  FusedLassoFit fused;
  std::vector<std::pair<double, double>> empty_risk;
  /// integral of hazard_raw over the window minus A(tau_max) - A(tau_min)
  double integral_gap = 0.0;
  std::vector<std::string> warnings;
};

/// Breslow estimate -> grid increments -> bootstrap-tuned fused lasso ->
/// step hazard in original time units.
HazardFit fit_hazard(const SurvivalFrame& frame, const FitConfig& config);

/// Steps 2 and 3 only, starting from a given cumulative hazard estimate.
HazardFit fit_from_curve(const BreslowCurve& curve, const Window& window, std::size_t m,
                         const TuningConfig& tuning);

/// Truth on the grid: truth(t_j) * scale for j = 1..m, comparable with the
/// fused lasso vector.
std::vector<double> discretize_truth(const StepFunction& truth, const Window& window, std::size_t m);

}  // namespace pchaz
