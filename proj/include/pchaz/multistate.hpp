#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pchaz/event_data.hpp"
#include "pchaz/pipeline.hpp"
#include "pchaz/step_function.hpp"

namespace pchaz {

/// Illness-death model without recovery: 0 = initial, 1 = progressed,
/// 2 = dead. Hazards are continued by their nearest level outside their
/// fitting windows.
struct IllnessDeathModel {
  StepFunction a01;
  StepFunction a02;
  StepFunction a12;

  void validate() const;
};

struct IllnessDeathConfig {
  FitConfig t01;
  FitConfig t02;
  FitConfig t12;

  /// Same settings for all three transitions; the 1 -> 2 window starts at
  /// the 2.5% event-time quantile because its data are left truncated.
  static IllnessDeathConfig uniform(const FitConfig& base);
};

struct IllnessDeathFit {
  IllnessDeathModel model;
  HazardFit f01;
  HazardFit f02;
  HazardFit f12;
};

/// Fits the three transition hazards independently from their frames.
/// Throws ValidationError naming a transition that has no events.
IllnessDeathFit fit_illness_death(std::span<const TransitionRecord> records, const IllnessDeathConfig& config);

/// Survival-type curve on a grid. at() reads it as a right-continuous step
/// function, which is exact for Kaplan-Meier curves.
struct SurvivalCurve {
  std::vector<double> grid;
  std::vector<double> values;

  double at(double t) const;
};

struct StateOccupation {
  std::vector<double> grid;
  std::vector<double> p00;
  std::vector<double> p01;
  std::vector<double> p02;
};

/// P_{0k}(0, t) on a nondecreasing grid of times >= 0, in closed form over
/// the common refinement of the three break sets.
StateOccupation state_occupation(const IllnessDeathModel& model, std::span<const double> grid);

/// (S_PFS, S_OS) = (P00, P00 + P01) on the grid.
std::pair<SurvivalCurve, SurvivalCurve> survival_curves(const IllnessDeathModel& model,
                                                        std::span<const double> grid);

/// Product-limit estimator with risk sets 1(L < t <= T); covariates ignored.
/// The grid holds 0 followed by the distinct event times.
SurvivalCurve kaplan_meier(const SurvivalFrame& frame);

}  // namespace pchaz
