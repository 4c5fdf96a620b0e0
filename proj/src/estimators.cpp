#include "pchaz/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pchaz/errors.hpp"

namespace pchaz {
namespace {

/// Total order on records so that sums over risk sets are accumulated in an
/// order that does not depend on how the input was permuted.
bool canonical_less(const SurvivalRecord& a, const SurvivalRecord& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.entry_time() != b.entry_time()) return a.entry_time() < b.entry_time();
  if (a.status != b.status) return a.status < b.status;
  return a.covariates < b.covariates;
}

/// Sort orders and event groups shared by the partial likelihood and the
/// Breslow estimator. Risk sets are swept from the last event time down:
/// records with T >= s are added, records with L >= s (not yet entered)
/// are removed again.
struct RiskSweep {
  std::vector<std::size_t> by_time_desc;
  std::vector<std::size_t> by_entry_desc;  // only records with entry > 0
  std::vector<double> event_times;         // distinct, descending
  std::vector<std::vector<std::size_t>> event_members;

  explicit RiskSweep(const SurvivalFrame& frame) {
    const auto& rec = frame.records();
    const std::size_t n = rec.size();
    by_time_desc.resize(n);
    std::iota(by_time_desc.begin(), by_time_desc.end(), std::size_t{0});
    std::sort(by_time_desc.begin(), by_time_desc.end(),
              [&](std::size_t i, std::size_t j) { return canonical_less(rec[j], rec[i]); });
    for (std::size_t i : by_time_desc) {
      if (rec[i].entry_time() > 0.0) by_entry_desc.push_back(i);
    }
    std::stable_sort(by_entry_desc.begin(), by_entry_desc.end(), [&](std::size_t i, std::size_t j) {
      return rec[i].entry_time() > rec[j].entry_time();
    });
    for (std::size_t i : by_time_desc) {
      if (rec[i].status != 1) continue;
      if (event_times.empty() || event_times.back() != rec[i].time) {
        event_times.push_back(rec[i].time);
        event_members.emplace_back();
      }
      event_members.back().push_back(i);
    }
  }

  /// Calls visit(k, add_index) / remove(index) so the caller's running sums
  /// describe the risk set at event_times[k] when on_event(k) fires.
  template <class Add, class Remove, class OnEvent>
  void run(const SurvivalFrame& frame, Add add, Remove remove, OnEvent on_event) const {
    const auto& rec = frame.records();
    std::size_t pt = 0, pe = 0;
    for (std::size_t k = 0; k < event_times.size(); ++k) {
      const double s = event_times[k];
      while (pt < by_time_desc.size() && rec[by_time_desc[pt]].time >= s) add(by_time_desc[pt++]);
      while (pe < by_entry_desc.size() && rec[by_entry_desc[pe]].entry_time() >= s) {
        remove(by_entry_desc[pe++]);
      }
      on_event(k);
    }
  }
};

struct CoxState {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd info;
};

class PartialLikelihood {
 public:
  PartialLikelihood(const SurvivalFrame& frame, std::vector<std::size_t> active)
      : frame_(frame), sweep_(frame), active_(std::move(active)) {
    const std::size_t n = frame.size();
    const std::size_t d = active_.size();
    x_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t c = 0; c < d; ++c) {
      double mean = 0.0;
      for (const auto& r : frame.records()) mean += r.covariates[active_[c]];
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        x_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            frame.records()[i].covariates[active_[c]] - mean;
      }
    }
  }

  std::size_t dim() const { return active_.size(); }

  CoxState evaluate(const Eigen::VectorXd& beta, bool with_info) const {
    const Eigen::Index d = static_cast<Eigen::Index>(dim());
    const Eigen::VectorXd eta = x_ * beta;
    const Eigen::VectorXd w = eta.array().exp();
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(d, with_info ? d : 0);
    CoxState st;
    st.score = Eigen::VectorXd::Zero(d);
    st.info = Eigen::MatrixXd::Zero(d, d);
    auto update = [&](std::size_t i, double sign) {
      const auto ii = static_cast<Eigen::Index>(i);
      s0 += sign * w(ii);
      s1.noalias() += sign * w(ii) * x_.row(ii).transpose();
      if (with_info) s2.noalias() += sign * w(ii) * x_.row(ii).transpose() * x_.row(ii);
    };
    sweep_.run(
        frame_, [&](std::size_t i) { update(i, 1.0); }, [&](std::size_t i) { update(i, -1.0); },
        [&](std::size_t k) {
          const auto& members = sweep_.event_members[k];
          const double dk = static_cast<double>(members.size());
          for (std::size_t i : members) {
            const auto ii = static_cast<Eigen::Index>(i);
            st.loglik += eta(ii);
            st.score.noalias() += x_.row(ii).transpose();
          }
          st.loglik -= dk * std::log(s0);
          const Eigen::VectorXd mean = s1 / s0;
          st.score.noalias() -= dk * mean;
          if (with_info) st.info.noalias() += dk * (s2 / s0 - mean * mean.transpose());
        });
    return st;
  }

 private:
  const SurvivalFrame& frame_;
  RiskSweep sweep_;
  std::vector<std::size_t> active_;
  Eigen::MatrixXd x_;
};

std::vector<std::size_t> all_columns(std::size_t d) {
  std::vector<std::size_t> cols(d);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return cols;
}

void check_beta(const SurvivalFrame& frame, std::span<const double> beta) {
  if (beta.size() != frame.dim()) {
    throw ValidationError("beta has length " + std::to_string(beta.size()) + " but frame has " +
                          std::to_string(frame.dim()) + " covariates");
  }
}

}  // namespace

double cox_log_partial_likelihood(const SurvivalFrame& frame, std::span<const double> beta) {
  check_beta(frame, beta);
  PartialLikelihood pl(frame, all_columns(frame.dim()));
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  return pl.evaluate(b, false).loglik;
}

std::vector<double> cox_score(const SurvivalFrame& frame, std::span<const double> beta) {
  check_beta(frame, beta);
  PartialLikelihood pl(frame, all_columns(frame.dim()));
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  const Eigen::VectorXd s = pl.evaluate(b, false).score;
  return {s.data(), s.data() + s.size()};
}

CoxFit cox_fit(const SurvivalFrame& frame, const CoxOptions& options) {
  if (frame.dim() == 0) throw ValidationError("cox_fit needs at least one covariate");
  if (frame.event_count() == 0) throw ValidationError("cox_fit needs at least one event");

  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < frame.dim(); ++c) {
    const double first = frame.records().front().covariates[c];
    const bool constant = std::all_of(frame.records().begin(), frame.records().end(),
                                      [&](const auto& r) { return r.covariates[c] == first; });
    if (!constant) active.push_back(c);
  }

  CoxFit fit;
  fit.beta.assign(frame.dim(), 0.0);
  PartialLikelihood pl(frame, active);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(active.size()));
  CoxState st = pl.evaluate(beta, true);

  // Converged needs both a small score and a small Newton step; under
  // separation the score decays like exp(-beta) while steps stay O(1).
  constexpr double step_tol = 1e-6;
  for (; fit.iterations < options.max_iter; ++fit.iterations) {
    if (active.empty()) {
      fit.converged = true;
      break;
    }
    const auto cod = st.info.completeOrthogonalDecomposition();
    // a singular information matrix at a finite beta means the likelihood
    // flattens out towards infinity
    if (cod.rank() < static_cast<Eigen::Index>(active.size())) break;
    const Eigen::VectorXd step = cod.solve(st.score);
    const bool small_score = st.score.cwiseAbs().maxCoeff() <= options.tol;
    if (small_score && step.cwiseAbs().maxCoeff() <= step_tol * (1.0 + beta.cwiseAbs().maxCoeff())) {
      fit.converged = true;
      break;
    }
    double factor = 1.0;
    Eigen::VectorXd candidate = beta + step;
    CoxState next = pl.evaluate(candidate, true);
    for (int h = 0; h < options.max_halvings && !(next.loglik >= st.loglik); ++h) {
      factor *= 0.5;
      candidate = beta + factor * step;
      next = pl.evaluate(candidate, true);
    }
    if (!(next.loglik >= st.loglik)) break;  // no ascent direction left
    beta = candidate;
    st = std::move(next);
    if (beta.cwiseAbs().maxCoeff() > options.beta_guard) break;
  }
  for (std::size_t c = 0; c < active.size(); ++c) fit.beta[active[c]] = beta(static_cast<Eigen::Index>(c));
  fit.log_partial_likelihood = st.loglik;
  return fit;
}

BreslowCurve::BreslowCurve(std::vector<double> jump_times, std::vector<double> jump_sizes, double tau)
    : times_(std::move(jump_times)), sizes_(std::move(jump_sizes)), tau_(tau) {
  if (times_.size() != sizes_.size()) throw ValidationError("jump times and sizes differ in length");
  double acc = 0.0;
  cumulative_.reserve(sizes_.size());
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (k > 0 && !(times_[k - 1] < times_[k])) {
      throw ValidationError("jump times must be strictly increasing");
    }
    if (!(sizes_[k] >= 0.0) || !std::isfinite(sizes_[k])) {
      throw ValidationError("jump sizes must be finite and nonnegative");
    }
    acc += sizes_[k];
    cumulative_.push_back(acc);
  }
}

double BreslowCurve::operator()(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

std::vector<double> BreslowCurve::evaluate_sorted(std::span<const double> grid) const {
  std::vector<double> out(grid.size());
  std::size_t k = 0;
  double value = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    while (k < times_.size() && times_[k] <= grid[g]) value = cumulative_[k++];
    out[g] = value;
  }
  return out;
}

BreslowCurve breslow_fit(const SurvivalFrame& frame, std::span<const double> beta) {
  check_beta(frame, beta);
  const std::vector<double> w = relative_risks(frame, beta);
  const RiskSweep sweep(frame);
  const std::size_t K = sweep.event_times.size();
  std::vector<double> times(K), sizes(K);
  double zbar = 0.0;
  sweep.run(
      frame, [&](std::size_t i) { zbar += w[i]; }, [&](std::size_t i) { zbar -= w[i]; },
      [&](std::size_t k) {
        // reversed into ascending order
        times[K - 1 - k] = sweep.event_times[k];
        sizes[K - 1 - k] = zbar > 0.0 ? static_cast<double>(sweep.event_members[k].size()) / zbar : 0.0;
      });
  std::vector<double> kept_times, kept_sizes;
  for (std::size_t k = 0; k < K; ++k) {
    if (sizes[k] > 0.0) {
      kept_times.push_back(times[k]);
      kept_sizes.push_back(sizes[k]);
    }
  }
  double tau = 0.0;
  for (const auto& r : frame.records()) tau = std::max(tau, r.time);
  return BreslowCurve(std::move(kept_times), std::move(kept_sizes), tau);
}

double event_time_quantile(const SurvivalFrame& frame, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("quantile level must lie in [0, 1]");
  std::vector<double> t;
  for (const auto& r : frame.records()) {
    if (r.status == 1) t.push_back(r.time);
  }
  if (t.empty()) throw ValidationError("no uncensored event times");
  std::sort(t.begin(), t.end());
  const auto n = static_cast<double>(t.size());
  const double rank = std::ceil(p * n);
  const std::size_t idx = rank < 1.0 ? 0 : std::min(t.size() - 1, static_cast<std::size_t>(rank) - 1);
  return t[idx];
}

Window choose_window(const SurvivalFrame& frame, double p_low, double p_high) {
  if (!(p_low >= 0.0 && p_low < p_high && p_high <= 1.0)) {
    throw ValidationError("window quantiles need 0 <= p_low < p_high <= 1");
  }
  std::vector<double> t;
  for (const auto& r : frame.records()) {
    if (r.status == 1) t.push_back(r.time);
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  if (t.size() < 2) throw ValidationError("window selection needs at least 2 distinct event times");
  Window w{event_time_quantile(frame, p_low), event_time_quantile(frame, p_high)};
  if (!(w.tau_min < w.tau_max)) {
    throw ValidationError("quantile window is degenerate: tau_min == tau_max");
  }
  return w;
}

std::vector<std::pair<double, double>> empty_risk_intervals(const SurvivalFrame& frame, const Window& window) {
  // at-risk count changes by +1 just after L and by -1 just after T
  std::vector<std::pair<double, int>> events;
  for (const auto& r : frame.records()) {
    events.emplace_back(r.entry_time(), +1);
    events.emplace_back(r.time, -1);
  }
  std::sort(events.begin(), events.end());
  std::vector<std::pair<double, double>> gaps;
  int count = 0;
  double last = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < events.size();) {
    const double t = events[k].first;
    if (count == 0) {
      const double lo = std::max(last, window.tau_min);
      const double hi = std::min(t, window.tau_max);
      if (lo < hi) gaps.emplace_back(lo, hi);
    }
    while (k < events.size() && events[k].first == t) count += events[k++].second;
    last = t;
  }
  if (count == 0 && last < window.tau_max) gaps.emplace_back(std::max(last, window.tau_min), window.tau_max);
  return gaps;
}

IncrementSample build_increments(const BreslowCurve& curve, const Window& window, std::size_t m) {
  window.validate();
  if (m < 2) throw ValidationError("increment grid needs m >= 2");
  if (window.tau_min < 0.0 || window.tau_max > curve.tau()) {
    throw ValidationError("window [" + std::to_string(window.tau_min) + ", " + std::to_string(window.tau_max) +
                          "] lies outside the data support [0, " + std::to_string(curve.tau()) + "]");
  }
  IncrementSample s;
  s.window = window;
  s.m = m;
  s.scale = window.length();
  s.grid.resize(m + 1);
  for (std::size_t j = 0; j <= m; ++j) s.grid[j] = grid_point(window, m, j);
  const std::vector<double> a = curve.evaluate_sorted(s.grid);
  s.y.resize(m);
  const double md = static_cast<double>(m);
  for (std::size_t j = 1; j <= m; ++j) s.y[j - 1] = md * (a[j] - a[j - 1]);
  return s;
}

}  // namespace pchaz
