#include "pchaz/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "pchaz/csv.hpp"
#include "pchaz/errors.hpp"

namespace pchaz {

void FitConfig::validate(const SurvivalFrame& frame) const {
  if (window) window->validate();
  if (!window && !(p_low >= 0.0 && p_low < p_high && p_high <= 1.0)) {
    throw ValidationError("window quantiles need 0 <= p_low < p_high <= 1");
  }
  if (grid && *grid < 2) throw ValidationError("grid size must be at least 2");
  tuning.validate();
  if (beta_source == BetaSource::supplied && beta.size() != frame.dim()) {
    throw ValidationError("supplied beta has " + std::to_string(beta.size()) + " entries but the data have " +
                          std::to_string(frame.dim()) + " covariates");
  }
}

HazardFit fit_from_curve(const BreslowCurve& curve, const Window& window, std::size_t m,
                         const TuningConfig& tuning) {
  HazardFit out;
  out.cumulative = curve;
  out.window = window;
  out.increments = build_increments(curve, window, m);
  out.tuning = bootstrap_lambda(out.increments.y, tuning);
  out.fused = flsa_solve(out.increments.y, out.tuning.lambda);
  out.hazard_raw = interpolate(out.fused, window);

  std::vector<double> clamped = out.hazard_raw.levels();
  bool any_negative = false;
  for (double& v : clamped) {
    if (v < 0.0) {
      v = 0.0;
      any_negative = true;
    }
  }
  out.hazard = StepFunction(window, out.hazard_raw.breaks(), std::move(clamped));
  if (any_negative) out.warnings.push_back("negative fitted hazard levels clamped to 0");

  out.integral_gap = (out.hazard_raw.integral(window.tau_max) - out.hazard_raw.integral(window.tau_min)) -
                     (curve(window.tau_max) - curve(window.tau_min));
  return out;
}

HazardFit fit_hazard(const SurvivalFrame& frame, const FitConfig& config) {
  if (frame.empty()) throw ValidationError("cannot fit a hazard to an empty frame");
  config.validate(frame);

  std::vector<double> beta;
  std::optional<CoxFit> cox;
  std::vector<std::string> warnings;
  switch (config.beta_source) {
    case BetaSource::none:
      beta.assign(frame.dim(), 0.0);
      break;
    case BetaSource::supplied:
      beta = config.beta;
      break;
    case BetaSource::fit:
      if (frame.dim() > 0) {
        cox = cox_fit(frame, config.cox);
        beta = cox->beta;
        if (!cox->converged) warnings.push_back("Cox fit did not converge; using the last iterate");
      }
      break;
  }

  const BreslowCurve curve = breslow_fit(frame, beta);
  const Window window = config.window ? *config.window : choose_window(frame, config.p_low, config.p_high);
  const std::size_t m = config.grid.value_or(frame.size());
  if (m < 2) throw ValidationError("grid size must be at least 2");

  auto gaps = empty_risk_intervals(frame, window);
  for (const auto& [a, b] : gaps) {
    warnings.push_back("nobody at risk on (" + csv::format(a) + ", " + csv::format(b) +
                       "]; increments there are 0");
  }

  HazardFit out = fit_from_curve(curve, window, m, config.tuning);
  out.beta = std::move(beta);
  out.cox = std::move(cox);
  out.empty_risk = std::move(gaps);
  warnings.insert(warnings.end(), out.warnings.begin(), out.warnings.end());
  out.warnings = std::move(warnings);
  return out;
}

std::vector<double> discretize_truth(const StepFunction& truth, const Window& window, std::size_t m) {
  window.validate();
  if (m == 0) throw ValidationError("grid size must be positive");
  const double scale = window.length();
  std::vector<double> out(m);
  for (std::size_t j = 1; j <= m; ++j) out[j - 1] = truth(grid_point(window, m, j)) * scale;
  return out;
}

}  // namespace pchaz
