#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pchaz/event_data.hpp"
#include "pchaz/multistate.hpp"
#include "pchaz/rng.hpp"
#include "pchaz/step_function.hpp"
#include "pchaz/tuning.hpp"

namespace pchaz {

struct Scenario {
  std::string name = "custom";
  StepFunction hazard;
  std::size_t n = 1000;
  bool with_covariates = false;
  std::vector<double> beta{0.25, 1.0};
  double censoring_rate = 0.5;  // 0 means no censoring
  Window window{0.0, 1.0};

  void validate() const;
};

/// 4 on [0, 0.25), 1 afterwards.
StepFunction hazard_one_jump();
/// 4 on [0, 0.2), 1.5 on [0.2, 0.6), 0.5 afterwards.
StepFunction hazard_two_jumps();

/// A1, B1 (one jump), A2, B2 (two jumps); B adds the two Cox covariates.
Scenario named_scenario(const std::string& name, std::size_t n);
std::vector<std::string> scenario_names();

/// Event time with the given hazard by inversion of its integral.
double sample_piecewise_exponential(const StepFunction& hazard, Rng& rng);

/// One simulated sample. Per subject the draws are W1, W2 (only with
/// covariates), the event-time exponential, then censoring.
SurvivalFrame gen_scenario(const Scenario& s, std::uint64_t seed);

/// (1/m) sum (a - b)^2.
double metric_l2(std::span<const double> alpha_hat, std::span<const double> alpha_star);
/// max over truth of the distance to the nearest estimated point; +inf when
/// nothing was estimated.
double metric_dasym(std::span<const double> estimated, std::span<const double> truth);
/// Ratio of empirical variances; +inf when u has zero variance.
double metric_snr(std::span<const double> alpha_star, std::span<const double> u);

struct StudyOptions {
  std::size_t replications = 200;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  double q = 0.9;
  std::size_t k_max = 20;
  std::size_t l_boot = 100;
};

struct RunResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double l2_sq = 0.0;
  double d_asym = 0.0;
  double snr = 0.0;
  double censored_fraction = 0.0;
  double lambda0 = 0.0;
  double lambda = 0.0;
  std::vector<double> changepoints;
};

struct Summary {
  std::size_t count = 0;  // finite values that entered the mean
  double mean = 0.0;
  std::optional<double> sd;  // absent for fewer than two values
};

Summary summarize(std::span<const double> values);

struct StudyReport {
  std::string scenario;
  std::size_t n = 0;
  StudyOptions options;
  std::vector<RunResult> runs;
  std::size_t failed = 0;
  std::size_t empty_estimates = 0;  // runs with no estimated change point
  Summary l2_sq;
  Summary d_asym;
  Summary snr;
  Summary censored_fraction;
};

/// Replication r uses substream r of the seed; results do not depend on the
/// number of threads. Failed replications are kept with their message.
StudyReport run_study(const Scenario& s, const StudyOptions& options);

/// Table-style CSV: one row per report with "mean (sd)" cells and raw columns.
void write_study_table(std::ostream& out, std::span<const StudyReport> reports);

/// Illness-death histories in long format, ids 1..n. Per subject the draws
/// are the exit exponential, the cause uniform, the 1 -> 2 exponential, then
/// censoring, whether or not each is used.
std::vector<TransitionRecord> simulate_illness_death(const IllnessDeathModel& model, std::size_t n,
                                                     double censoring_rate, std::uint64_t seed);

/// Pointwise sum of two step functions on the hull of their domains.
StepFunction add_step_functions(const StepFunction& a, const StepFunction& b);

}  // namespace pchaz
