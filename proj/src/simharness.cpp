#include "pchaz/simharness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "pchaz/csv.hpp"
#include "pchaz/errors.hpp"
#include "pchaz/pipeline.hpp"

namespace pchaz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_hazard(const StepFunction& hazard) {
  if (!hazard.nonnegative()) throw ValidationError("hazard levels must be nonnegative");
  if (!(hazard.levels().back() > 0.0)) {
    throw ValidationError("hazard must be eventually positive to produce finite event times");
  }
}

double empirical_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

void Scenario::validate() const {
  if (n == 0) throw ValidationError("scenario needs n >= 1");
  if (!(censoring_rate >= 0.0) || !std::isfinite(censoring_rate)) {
    throw ValidationError("censoring rate must be finite and >= 0");
  }
  window.validate();
  check_hazard(hazard);
  if (with_covariates && beta.size() != 2) throw ValidationError("scenario covariates need a beta of length 2");
}

StepFunction hazard_one_jump() { return StepFunction(Window{0.0, 1.0}, {0.25}, {4.0, 1.0}); }

StepFunction hazard_two_jumps() { return StepFunction(Window{0.0, 1.0}, {0.2, 0.6}, {4.0, 1.5, 0.5}); }

std::vector<std::string> scenario_names() { return {"A1", "B1", "A2", "B2"}; }

Scenario named_scenario(const std::string& name, std::size_t n) {
  if (name.size() != 2 || (name[0] != 'A' && name[0] != 'B') || (name[1] != '1' && name[1] != '2')) {
    throw ValidationError("unknown scenario '" + name + "' (expected A1, B1, A2 or B2)");
  }
  Scenario s;
  s.name = name;
  s.n = n;
  s.hazard = name[1] == '1' ? hazard_one_jump() : hazard_two_jumps();
  s.with_covariates = name[0] == 'B';
  return s;
}

double sample_piecewise_exponential(const StepFunction& hazard, Rng& rng) {
  check_hazard(hazard);
  return hazard.inverse_integral(rng.exponential());
}

SurvivalFrame gen_scenario(const Scenario& s, std::uint64_t seed) {
  s.validate();
  Rng rng(seed);
  std::vector<SurvivalRecord> recs;
  recs.reserve(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    SurvivalRecord r;
    double risk = 1.0;
    if (s.with_covariates) {
      const double w1 = rng.coin() ? 1.0 : -1.0;
      const double w2 = rng.uniform(-1.0, 1.0);
      r.covariates = {w1, w2};
      risk = std::exp(s.beta[0] * w1 + s.beta[1] * w2);
    }
    const double t = s.hazard.inverse_integral(rng.exponential() / risk);
    const double c = s.censoring_rate > 0.0 ? rng.exponential(s.censoring_rate) : kInf;
    r.time = std::min(t, c);
    r.status = t <= c ? 1 : 0;
    recs.push_back(std::move(r));
  }
  return SurvivalFrame(std::move(recs), s.with_covariates ? std::vector<std::string>{"w1", "w2"}
                                                          : std::vector<std::string>{});
}

double metric_l2(std::span<const double> alpha_hat, std::span<const double> alpha_star) {
  if (alpha_hat.size() != alpha_star.size() || alpha_hat.empty()) {
    throw ValidationError("l2 metric needs two nonempty vectors of equal length");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < alpha_hat.size(); ++j) acc += (alpha_hat[j] - alpha_star[j]) * (alpha_hat[j] - alpha_star[j]);
  return acc / static_cast<double>(alpha_hat.size());
}

double metric_dasym(std::span<const double> estimated, std::span<const double> truth) {
  if (truth.empty()) throw ValidationError("asymmetric distance needs a nonempty true change-point set");
  if (estimated.empty()) return kInf;
  double worst = 0.0;
  for (double b : truth) {
    double best = kInf;
    for (double a : estimated) best = std::min(best, std::abs(a - b));
    worst = std::max(worst, best);
  }
  return worst;
}

double metric_snr(std::span<const double> alpha_star, std::span<const double> u) {
  if (alpha_star.size() != u.size()) throw ValidationError("SNR needs signal and noise of equal length");
  const double noise = empirical_variance(u);
  if (noise == 0.0) return kInf;
  return empirical_variance(alpha_star) / noise;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++s.count;
    }
  }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count >= 2) {
    double ss = 0.0;
    for (double v : values) {
      if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
    }
    s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

namespace {

RunResult run_once(const Scenario& s, const StudyOptions& o, std::size_t r) {
  RunResult out;
  out.index = r;
  out.seed = substream_seed(o.seed, r);
  try {
    const SurvivalFrame frame = gen_scenario(s, substream_seed(out.seed, 0));
    FitConfig cfg;
    cfg.window = s.window;
    cfg.grid = s.n;
    cfg.tuning = {o.q, o.k_max, o.l_boot, substream_seed(out.seed, 1)};
    cfg.beta_source = BetaSource::fit;
    const HazardFit fit = fit_hazard(frame, cfg);

    const std::vector<double> truth = discretize_truth(s.hazard, s.window, s.n);
    std::vector<double> u(truth.size());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = fit.increments.y[j] - truth[j];
    out.l2_sq = metric_l2(fit.fused.alpha, truth);
    out.changepoints = changepoint_times(fit.fused, s.window);
    out.d_asym = metric_dasym(out.changepoints, s.hazard.breaks());
    out.snr = metric_snr(truth, u);
    out.censored_fraction =
        1.0 - static_cast<double>(frame.event_count()) / static_cast<double>(frame.size());
    out.lambda0 = fit.tuning.lambda0;
    out.lambda = fit.tuning.lambda;
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

StudyReport run_study(const Scenario& s, const StudyOptions& options) {
  s.validate();
  if (options.replications == 0) throw ValidationError("replications must be at least 1");
  if (options.threads == 0) throw ValidationError("threads must be at least 1");
  TuningConfig{options.q, options.k_max, options.l_boot, 0}.validate();

  StudyReport rep;
  rep.scenario = s.name;
  rep.n = s.n;
  rep.options = options;
  rep.runs.resize(options.replications);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < options.replications; r = next++) rep.runs[r] = run_once(s, options, r);
  };
  const std::size_t nthreads = std::min(options.threads, options.replications);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<double> l2, da, snr, cens;
  for (const RunResult& r : rep.runs) {
    if (!r.ok) {
      ++rep.failed;
      continue;
    }
    l2.push_back(r.l2_sq);
    da.push_back(r.d_asym);
    if (!std::isfinite(r.d_asym)) ++rep.empty_estimates;
    snr.push_back(r.snr);
    cens.push_back(r.censored_fraction);
  }
  rep.l2_sq = summarize(l2);
  rep.d_asym = summarize(da);
  rep.snr = summarize(snr);
  rep.censored_fraction = summarize(cens);
  return rep;
}

void write_study_table(std::ostream& out, std::span<const StudyReport> reports) {
  auto cell = [](const Summary& s) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << s.mean;
    if (s.sd) os << " (" << *s.sd << ")";
    return os.str();
  };
  auto num = [](const std::optional<double>& v) { return v ? csv::format(*v) : std::string(); };
  out << "scenario,n,reps,failed,empty_estimates,l2_sq,d_asym,snr,censored,"
         "l2_sq_mean,l2_sq_sd,d_asym_mean,d_asym_sd,snr_mean,snr_sd,censored_mean\n";
  for (const StudyReport& r : reports) {
    out << r.scenario << ',' << r.n << ',' << r.options.replications << ',' << r.failed << ','
        << r.empty_estimates << ",\"" << cell(r.l2_sq) << "\",\"" << cell(r.d_asym) << "\",\"" << cell(r.snr)
        << "\",\"" << cell(r.censored_fraction) << "\"," << csv::format(r.l2_sq.mean) << ',' << num(r.l2_sq.sd)
        << ',' << csv::format(r.d_asym.mean) << ',' << num(r.d_asym.sd) << ',' << csv::format(r.snr.mean) << ','
        << num(r.snr.sd) << ',' << csv::format(r.censored_fraction.mean) << '\n';
  }
}

StepFunction add_step_functions(const StepFunction& a, const StepFunction& b) {
  const Window hull{std::min(a.domain().tau_min, b.domain().tau_min),
                    std::max(a.domain().tau_max, b.domain().tau_max)};
  const std::array<const StepFunction*, 2> both{&a, &b};
  std::vector<double> breaks = merged_breaks(both);
  std::vector<double> levels{a.levels().front() + b.levels().front()};
  for (double t : breaks) levels.push_back(a(t) + b(t));
  return StepFunction(hull, std::move(breaks), std::move(levels));
}

std::vector<TransitionRecord> simulate_illness_death(const IllnessDeathModel& model, std::size_t n,
                                                     double censoring_rate, std::uint64_t seed) {
  model.validate();
  if (!(censoring_rate >= 0.0) || !std::isfinite(censoring_rate)) {
    throw ValidationError("censoring rate must be finite and >= 0");
  }
  const StepFunction exit_hazard = add_step_functions(model.a01, model.a02);
  std::vector<TransitionRecord> out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(substream_seed(seed, i));
    const double e0 = rng.exponential();
    const double u = rng.uniform();
    const double e12 = rng.exponential();
    const double c = censoring_rate > 0.0 ? rng.exponential(censoring_rate) : kInf;

    const std::string id = std::to_string(i + 1);
    const double t0 = exit_hazard.inverse_integral(e0);
    if (!std::isfinite(t0) && !std::isfinite(c)) {
      throw ValidationError("simulated subject never leaves state 0 and is never censored");
    }
    if (c < t0) {
      out.push_back({id, 0, std::nullopt, 0.0, c});
      continue;
    }
    const double total = exit_hazard(t0);
    const bool ill = total > 0.0 && u * total < model.a01(t0);
    if (!ill) {
      out.push_back({id, 0, 2, 0.0, t0});
      continue;
    }
    out.push_back({id, 0, 1, 0.0, t0});
    const double t2 = model.a12.inverse_integral(model.a12.integral(t0) + e12);
    if (!std::isfinite(t2) && !std::isfinite(c)) {
      throw ValidationError("simulated subject never leaves state 1 and is never censored");
    }
    if (c < t2) {
      out.push_back({id, 1, std::nullopt, t0, c});
    } else {
      out.push_back({id, 1, 2, t0, t2});
    }
  }
  return out;
}

}  // namespace pchaz
