#include "pchaz/multistate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "pchaz/errors.hpp"

namespace pchaz {

void IllnessDeathModel::validate() const {
  for (const StepFunction* f : {&a01, &a02, &a12}) {
    if (!f->nonnegative()) throw ValidationError("illness-death hazards must be nonnegative");
  }
}

IllnessDeathConfig IllnessDeathConfig::uniform(const FitConfig& base) {
  IllnessDeathConfig c{base, base, base};
  if (!base.window) c.t12.p_low = std::max(base.p_low, 0.025);
  return c;
}

IllnessDeathFit fit_illness_death(std::span<const TransitionRecord> records, const IllnessDeathConfig& config) {
  validate_trajectories(records);
  auto fit_one = [&](int from, int to, const FitConfig& cfg) {
    const std::string name = "transition (" + std::to_string(from) + "," + std::to_string(to) + ")";
    SurvivalFrame frame;
    try {
      frame = split_transitions(records, from, to);
    } catch (const ValidationError&) {
      throw ValidationError(name + ": zero events");
    }
    if (frame.event_count() == 0) throw ValidationError(name + ": zero events");
    try {
      return fit_hazard(frame, cfg);
    } catch (const ValidationError& e) {
      throw ValidationError(name + ": " + e.what());
    }
  };
  IllnessDeathFit out;
  out.f01 = fit_one(0, 1, config.t01);
  out.f02 = fit_one(0, 2, config.t02);
  out.f12 = fit_one(1, 2, config.t12);
  out.model = {out.f01.hazard, out.f02.hazard, out.f12.hazard};
  return out;
}

double SurvivalCurve::at(double t) const {
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  if (it == grid.begin()) return 1.0;
  return values[static_cast<std::size_t>(it - grid.begin()) - 1];
}

namespace {

/// Advances (P00, P01) over an interval of length dt with constant rates.
void propagate(double& p00, double& p01, double a01, double a02, double a12, double dt) {
  if (dt <= 0.0) return;
  const double a = a01 + a02;
  const double b = a12;
  const double ea = std::exp(-a * dt);
  const double diff = b - a;
  // integral_0^dt exp(-a u) exp(-b (dt - u)) du, written to stay accurate as b -> a
  const double kernel = std::abs(diff) < 1e-10 ? dt * ea : ea * (-std::expm1(-diff * dt)) / diff;
  p01 = p01 * std::exp(-b * dt) + p00 * a01 * kernel;
  p00 *= ea;
}

}  // namespace

StateOccupation state_occupation(const IllnessDeathModel& model, std::span<const double> grid) {
  model.validate();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) throw ValidationError("curve grid must be finite and >= 0");
    if (i > 0 && grid[i] < grid[i - 1]) throw ValidationError("curve grid must be nondecreasing");
  }
  const std::array<const StepFunction*, 3> fns{&model.a01, &model.a02, &model.a12};
  std::vector<double> breaks = merged_breaks(fns);
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [](double b) { return b <= 0.0; }), breaks.end());

  StateOccupation out;
  out.grid.assign(grid.begin(), grid.end());
  double t = 0.0, p00 = 1.0, p01 = 0.0;
  std::size_t next = 0;
  auto step_to = [&](double target) {
    // rates are read at the left end of each constant piece
    propagate(p00, p01, model.a01(t), model.a02(t), model.a12(t), target - t);
    t = target;
  };
  for (double g : grid) {
    while (next < breaks.size() && breaks[next] <= g) step_to(breaks[next++]);
    step_to(g);
    out.p00.push_back(p00);
    out.p01.push_back(p01);
    out.p02.push_back(1.0 - p00 - p01);
  }
  return out;
}

std::pair<SurvivalCurve, SurvivalCurve> survival_curves(const IllnessDeathModel& model,
                                                        std::span<const double> grid) {
  const StateOccupation occ = state_occupation(model, grid);
  SurvivalCurve pfs{occ.grid, occ.p00};
  SurvivalCurve os{occ.grid, occ.p00};
  for (std::size_t i = 0; i < os.values.size(); ++i) os.values[i] += occ.p01[i];
  return {std::move(pfs), std::move(os)};
}

SurvivalCurve kaplan_meier(const SurvivalFrame& frame) {
  if (frame.empty()) throw ValidationError("Kaplan-Meier needs a nonempty frame");
  std::vector<double> events, exits, entries;
  for (const auto& r : frame.records()) {
    if (r.status == 1) events.push_back(r.time);
    exits.push_back(r.time);
    entries.push_back(r.entry_time());
  }
  std::sort(events.begin(), events.end());
  std::sort(exits.begin(), exits.end());
  std::sort(entries.begin(), entries.end());

  SurvivalCurve out{{0.0}, {1.0}};
  double s = 1.0;
  for (std::size_t k = 0; k < events.size();) {
    const double t = events[k];
    std::size_t d = 0;
    while (k < events.size() && events[k] == t) {
      ++d;
      ++k;
    }
    // Y(t) = #{L < t} - #{T < t}
    const auto entered = std::lower_bound(entries.begin(), entries.end(), t) - entries.begin();
    const auto gone = std::lower_bound(exits.begin(), exits.end(), t) - exits.begin();
    const auto at_risk = entered - gone;
    if (at_risk <= 0) continue;
    s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
    out.grid.push_back(t);
    out.values.push_back(s);
  }
  return out;
}

}  // namespace pchaz
