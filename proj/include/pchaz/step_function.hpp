#pragma once

#include <span>
#include <vector>

namespace pchaz {

/// Estimation interval [tau_min, tau_max].
struct Window {
  double tau_min = 0.0;
  double tau_max = 1.0;

  double length() const { return tau_max - tau_min; }
  bool contains(double t) const { return t >= tau_min && t <= tau_max; }
  void validate() const;

  friend bool operator==(const Window&, const Window&) = default;
};

/// Point t_j = tau_min + j * length / m of an m-cell equidistant grid;
/// t_m is exactly tau_max.
double grid_point(const Window& window, std::size_t m, std::size_t j);

/// Right-continuous piecewise constant function on a window.
///
/// Level k applies on [breaks[k-1], breaks[k]) with the first level also
/// covering everything left of the first break and the last level everything
/// from the last break onwards. Outside the domain the nearest level is
/// continued, which is how hazards are evaluated from time 0.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(Window domain, std::vector<double> breaks, std::vector<double> levels);

  /// A single level on the whole domain.
  static StepFunction constant(Window domain, double level);

  const Window& domain() const { return domain_; }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& levels() const { return levels_; }
  std::size_t pieces() const { return levels_.size(); }

  double operator()(double t) const;

  /// Integral of the function over [0, t] with constant extension; t >= 0.
  double integral(double t) const;

  /// Smallest t >= 0 with integral(t) == x. Returns +inf when the total mass
  /// never reaches x (last level zero).
  double inverse_integral(double x) const;

  bool nonnegative() const;

  /// Same function with every level multiplied by `factor`.
  StepFunction scaled(double factor) const;

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  Window domain_{};
  std::vector<double> breaks_;
  std::vector<double> levels_{0.0};
};

/// Sorted union of the break points of several step functions.
std::vector<double> merged_breaks(std::span<const StepFunction* const> fns);

}  // namespace pchaz
