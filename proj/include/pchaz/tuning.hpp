#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pchaz {

struct TuningConfig {
  double q = 0.9;
  std::size_t k_max = 20;
  std::size_t l_boot = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TuningResult {
  double lambda0 = 0.0;
  double lambda = 0.0;
  std::vector<double> u_boot;     // one maximum statistic per bootstrap draw
  std::vector<double> residuals;  // y - pilot fit
  std::uint64_t seed = 0;
  double q = 0.0;
};

/// Smallest lambda on the solution path whose fit has at most k_max change
/// points (0 if the raw data already qualify).
double pilot_lambda(std::span<const double> y, std::size_t k_max);

/// U = 2 max_{2<=j<=n} | -(1/n) sum_{i<j} u_i + ((j-1)/n^2) sum_i u_i |,
/// the sup-norm of the centred design applied to u. Needs n >= 2.
double effective_noise(std::span<const double> u);

/// Order statistic ceil(q L) (1-based) of the sample.
double type1_quantile(std::span<const double> sample, double q);

/// Multiplier bootstrap choice of lambda: residuals of the pilot fit are
/// multiplied by standard normals, one RNG substream per draw, and lambda is
/// the q-quantile of the resulting effective-noise statistics.
TuningResult bootstrap_lambda(std::span<const double> y, const TuningConfig& config);

}  // namespace pchaz
