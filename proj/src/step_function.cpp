#include "pchaz/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pchaz/errors.hpp"

namespace pchaz {

void Window::validate() const {
  if (!std::isfinite(tau_min) || !std::isfinite(tau_max) || !(tau_min < tau_max)) {
    throw ValidationError("window requires finite tau_min < tau_max, got [" +
                          std::to_string(tau_min) + ", " + std::to_string(tau_max) + "]");
  }
}

double grid_point(const Window& window, std::size_t m, std::size_t j) {
  if (j >= m) return window.tau_max;
  return window.tau_min + static_cast<double>(j) * window.length() / static_cast<double>(m);
}

StepFunction::StepFunction(Window domain, std::vector<double> breaks, std::vector<double> levels)
    : domain_(domain), breaks_(std::move(breaks)), levels_(std::move(levels)) {
  domain_.validate();
  if (levels_.size() != breaks_.size() + 1) {
    throw ValidationError("step function needs exactly one more level than breaks");
  }
  for (std::size_t k = 0; k < breaks_.size(); ++k) {
    const double b = breaks_[k];
    if (!(b > domain_.tau_min && b < domain_.tau_max)) {
      throw ValidationError("step function break " + std::to_string(b) +
                            " is not strictly inside its domain");
    }
    if (k > 0 && !(breaks_[k - 1] < b)) {
      throw ValidationError("step function breaks must be strictly increasing");
    }
  }
  for (double v : levels_) {
    if (!std::isfinite(v)) throw ValidationError("step function levels must be finite");
  }
}

StepFunction StepFunction::constant(Window domain, double level) {
  return StepFunction(domain, {}, {level});
}

double StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return levels_[static_cast<std::size_t>(it - breaks_.begin())];
}

double StepFunction::integral(double t) const {
  if (t <= 0.0) return 0.0;
  double acc = 0.0;
  double left = 0.0;
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    const double right = k < breaks_.size() ? breaks_[k] : std::numeric_limits<double>::infinity();
    if (right <= left) continue;
    if (t <= right) return acc + levels_[k] * (t - left);
    acc += levels_[k] * (right - left);
    left = right;
  }
  return acc;
}

double StepFunction::inverse_integral(double x) const {
  if (x <= 0.0) return 0.0;
  double acc = 0.0;
  double left = 0.0;
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    const double right = k < breaks_.size() ? breaks_[k] : std::numeric_limits<double>::infinity();
    if (right <= left) continue;
    const double level = levels_[k];
    if (level > 0.0) {
      const double mass = level * (right - left);
      if (acc + mass >= x) return left + (x - acc) / level;
      acc += mass;
    }
    left = right;
  }
  return std::numeric_limits<double>::infinity();
}

bool StepFunction::nonnegative() const {
  return std::all_of(levels_.begin(), levels_.end(), [](double v) { return v >= 0.0; });
}

StepFunction StepFunction::scaled(double factor) const {
  StepFunction out = *this;
  for (double& v : out.levels_) v *= factor;
  return out;
}

std::vector<double> merged_breaks(std::span<const StepFunction* const> fns) {
  std::vector<double> all;
  for (const StepFunction* f : fns) all.insert(all.end(), f->breaks().begin(), f->breaks().end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

}  // namespace pchaz
