#include "pchaz/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pchaz/errors.hpp"
#include "pchaz/flsa.hpp"
#include "pchaz/rng.hpp"

namespace pchaz {

void TuningConfig::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("tuning: q must lie in (0, 1), got " + std::to_string(q));
  if (l_boot == 0) throw ValidationError("tuning: number of bootstrap draws must be positive");
}

double pilot_lambda(std::span<const double> y, std::size_t k_max) {
  const auto path = flsa_path(y);
  for (const PathBreakpoint& b : path) {
    if (b.changepoint_count <= k_max) return b.lambda;
  }
  return path.back().lambda;
}

double effective_noise(std::span<const double> u) {
  const std::size_t n = u.size();
  if (n < 2) throw ValidationError("effective noise needs at least two residuals");
  const double nd = static_cast<double>(n);
  double total = 0.0;
  for (double v : u) total += v;
  double prefix = 0.0;
  double best = 0.0;
  for (std::size_t j = 2; j <= n; ++j) {
    prefix += u[j - 2];
    const double v = -prefix / nd + static_cast<double>(j - 1) / (nd * nd) * total;
    best = std::max(best, std::abs(v));
  }
  return 2.0 * best;
}

double type1_quantile(std::span<const double> sample, double q) {
  if (sample.empty()) throw ValidationError("quantile of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  const std::size_t idx = std::clamp<std::size_t>(rank, 1, sorted.size()) - 1;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(idx), sorted.end());
  return sorted[idx];
}

TuningResult bootstrap_lambda(std::span<const double> y, const TuningConfig& config) {
  config.validate();
  TuningResult out;
  out.seed = config.seed;
  out.q = config.q;
  out.lambda0 = pilot_lambda(y, config.k_max);
  const std::vector<double> pilot = flsa_solve(y, out.lambda0).alpha;
  out.residuals.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out.residuals[i] = y[i] - pilot[i];

  out.u_boot.resize(config.l_boot);
  std::vector<double> draw(y.size());
  for (std::size_t l = 0; l < config.l_boot; ++l) {
    Rng rng(substream_seed(config.seed, l));
    for (std::size_t i = 0; i < y.size(); ++i) draw[i] = out.residuals[i] * rng.normal();
    out.u_boot[l] = effective_noise(draw);
  }
  out.lambda = type1_quantile(out.u_boot, config.q);
  return out;
}

}  // namespace pchaz
