#include "pchaz/flsa.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include "pchaz/errors.hpp"

namespace pchaz {
namespace {

void check_input(std::span<const double> y, double lambda) {
  if (y.empty()) throw ValidationError("fused lasso needs at least one observation");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("fused lasso lambda must be finite and >= 0");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("fused lasso input contains NaN or infinity");
  }
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

FusedLassoFit FusedLassoFit::from_alpha(std::vector<double> alpha, double lambda) {
  FusedLassoFit fit;
  fit.lambda = lambda;
  fit.alpha = std::move(alpha);
  std::size_t start = 0;
  for (std::size_t i = 1; i <= fit.alpha.size(); ++i) {
    if (i == fit.alpha.size() || fit.alpha[i] != fit.alpha[i - 1]) {
      fit.blocks.push_back({start, i - 1, fit.alpha[start]});
      if (i < fit.alpha.size()) fit.changepoints.push_back(i);
      start = i;
    }
  }
  return fit;
}

double flsa_objective(std::span<const double> y, std::span<const double> alpha, double lambda) {
  if (y.size() != alpha.size()) throw ValidationError("objective: length mismatch");
  double loss = 0.0, tv = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    loss += (y[j] - alpha[j]) * (y[j] - alpha[j]);
    if (j > 0) tv += std::abs(alpha[j] - alpha[j - 1]);
  }
  return loss / static_cast<double>(y.size()) + lambda * tv;
}

FusedLassoFit flsa_solve(std::span<const double> y, double lambda) {
  check_input(y, lambda);
  const std::size_t m = y.size();
  if (m == 1 || lambda == 0.0) return FusedLassoFit::from_alpha({y.begin(), y.end()}, lambda);

  // Work with 1/2 sum (y - b)^2 + mu * TV(b), mu = m * lambda / 2.
  const double mu = 0.5 * static_cast<double>(m) * lambda;

  // Derivative of the running cost F_k is piecewise linear and increasing.
  // Knots live in x[l..r]; crossing knot i left to right adds
  // (da[i], db[i]) to the (slope, intercept) of the derivative.
  const std::size_t cap = 2 * m + 2;
  std::vector<double> x(cap), da(cap), db(cap);
  std::vector<double> lo_knot(m - 1), hi_knot(m - 1);
  long l = static_cast<long>(m), r = l - 1;

  // derivative on the outermost pieces
  double al = 1.0, bl = -y[0];
  double ar = 1.0, br = -y[0];

  for (std::size_t k = 0; k + 1 < m; ++k) {
    // Clip from the left: drop knots where F' <= -mu.
    long lo = l;
    while (lo <= r && al * x[lo] + bl <= -mu) {
      al += da[lo];
      bl += db[lo];
      ++lo;
    }
    // Clip from the right: drop knots where F' >= mu.
    long hi = r;
    while (hi >= lo && ar * x[hi] + br >= mu) {
      ar -= da[hi];
      br -= db[hi];
      --hi;
    }
    const double tm = (-mu - bl) / al;
    const double tp = std::max(tm, (mu - br) / ar);
    lo_knot[k] = tm;
    hi_knot[k] = tp;

    // The clipped derivative is -mu left of tm and +mu right of tp.
    l = lo - 1;
    x[l] = tm;
    da[l] = al;
    db[l] = bl + mu;
    r = hi + 1;
    x[r] = tp;
    da[r] = -ar;
    db[r] = mu - br;

    // add the next data term (b - y_{k+1}) to every piece
    al = 1.0;
    bl = -mu - y[k + 1];
    ar = 1.0;
    br = mu - y[k + 1];
  }

  // Root of the last derivative.
  long lo = l;
  while (lo <= r && al * x[lo] + bl <= 0.0) {
    al += da[lo];
    bl += db[lo];
    ++lo;
  }
  std::vector<double> alpha(m);
  alpha[m - 1] = -bl / al;
  for (std::size_t k = m - 1; k-- > 0;) {
    alpha[k] = std::clamp(alpha[k + 1], lo_knot[k], hi_knot[k]);
  }
  return FusedLassoFit::from_alpha(std::move(alpha), lambda);
}

namespace {

/// Agglomerative solution path. Block levels are mean + lambda * slope where
/// slope = m (s_right - s_left) / (2 size) and s_left, s_right are the signs
/// of the jumps to the neighbouring blocks (0 at the ends). The signs of a
/// block only change when it merges, so each adjacent pair has a fixed
/// candidate merge lambda until one of the two is touched.
class FusionPath {
 public:
  explicit FusionPath(std::span<const double> y) : m_(static_cast<double>(y.size())) {
    for (std::size_t i = 0; i < y.size();) {
      std::size_t j = i;
      double sum = 0.0;
      while (j < y.size() && y[j] == y[i]) sum += y[j++];
      blocks_.push_back({i, j - 1, sum, static_cast<double>(j - i), 0, 0});
      i = j;
    }
    const std::size_t nb = blocks_.size();
    prev_.resize(nb);
    next_.resize(nb);
    version_.assign(nb, 0);
    alive_.assign(nb, true);
    for (std::size_t b = 0; b < nb; ++b) {
      prev_[b] = b == 0 ? kNone : b - 1;
      next_[b] = b + 1 == nb ? kNone : b + 1;
    }
    for (std::size_t b = 0; b + 1 < nb; ++b) {
      const double s = sign(mean(b + 1) - mean(b));
      blocks_[b].right = s;
      blocks_[b + 1].left = s;
    }
    count_ = nb - 1;
    for (std::size_t b = 0; b + 1 < nb; ++b) push_candidate(b);
  }

  std::size_t count() const { return count_; }
  double lambda() const { return lambda_; }

  /// Next merge lambda, or +inf when fully fused.
  double peek() {
    drop_stale();
    return heap_.empty() ? std::numeric_limits<double>::infinity() : heap_.top().lambda;
  }

  /// Performs every merge scheduled at exactly the next merge lambda.
  void advance() {
    const double target = peek();
    if (!std::isfinite(target)) return;
    lambda_ = std::max(lambda_, target);
    while (peek() == target) {
      const Candidate c = heap_.top();
      heap_.pop();
      merge(c.left);
    }
  }

  std::vector<double> solution(double lambda) const {
    std::vector<double> alpha(static_cast<std::size_t>(m_));
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (!alive_[b]) continue;
      const double level = mean(b) + lambda * slope(b);
      std::fill(alpha.begin() + static_cast<long>(blocks_[b].start),
                alpha.begin() + static_cast<long>(blocks_[b].end) + 1, level);
    }
    return alpha;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Block {
    std::size_t start, end;
    double sum, size;
    double left, right;  // signs of jumps to the neighbours
  };
  struct Candidate {
    double lambda;
    std::size_t left;
    unsigned v_left, v_right;
    bool operator>(const Candidate& o) const {
      return lambda != o.lambda ? lambda > o.lambda : left > o.left;
    }
  };

  double mean(std::size_t b) const { return blocks_[b].sum / blocks_[b].size; }
  double slope(std::size_t b) const {
    return m_ * (blocks_[b].right - blocks_[b].left) / (2.0 * blocks_[b].size);
  }

  void push_candidate(std::size_t b) {
    const std::size_t c = next_[b];
    if (c == kNone) return;
    // level_c - level_b = (mean_c - mean_b) + lambda (slope_c - slope_b)
    const double gap = mean(c) - mean(b);
    const double closing = slope(b) - slope(c);
    if (!(gap * closing > 0.0)) return;
    const double at = std::max(lambda_, gap / closing);
    heap_.push({at, b, version_[b], version_[c]});
  }

  void drop_stale() {
    while (!heap_.empty()) {
      const Candidate& c = heap_.top();
      const std::size_t r = alive_[c.left] ? next_[c.left] : kNone;
      if (alive_[c.left] && r != kNone && version_[c.left] == c.v_left && version_[r] == c.v_right) return;
      heap_.pop();
    }
  }

  void merge(std::size_t b) {
    const std::size_t c = next_[b];
    Block& L = blocks_[b];
    const Block& R = blocks_[c];
    L.end = R.end;
    L.sum += R.sum;
    L.size += R.size;
    L.right = R.right;
    alive_[c] = false;
    next_[b] = next_[c];
    if (next_[c] != kNone) prev_[next_[c]] = b;
    ++version_[b];
    --count_;
    if (prev_[b] != kNone) push_candidate(prev_[b]);
    push_candidate(b);
  }

  double m_;
  std::vector<Block> blocks_;
  std::vector<std::size_t> prev_, next_;
  std::vector<unsigned> version_;
  std::vector<bool> alive_;
  std::size_t count_ = 0;
  double lambda_ = 0.0;
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap_;
};

}  // namespace

std::vector<PathBreakpoint> flsa_path(std::span<const double> y) {
  check_input(y, 0.0);
  FusionPath path(y);
  std::vector<PathBreakpoint> out{{0.0, path.count()}};
  while (std::isfinite(path.peek())) {
    path.advance();
    if (path.lambda() == out.back().lambda) {
      out.back().changepoint_count = path.count();
    } else {
      out.push_back({path.lambda(), path.count()});
    }
  }
  return out;
}

std::vector<double> flsa_path_solution(std::span<const double> y, double lambda) {
  check_input(y, lambda);
  FusionPath path(y);
  while (path.peek() <= lambda) path.advance();
  return path.solution(lambda);
}

std::size_t path_count_at(std::span<const PathBreakpoint> path, double lambda) {
  if (path.empty()) return 0;
  const auto it = std::upper_bound(path.begin(), path.end(), lambda,
                                   [](double v, const PathBreakpoint& b) { return v < b.lambda; });
  return it == path.begin() ? path.front().changepoint_count : std::prev(it)->changepoint_count;
}

std::vector<double> changepoint_times(const FusedLassoFit& fit, const Window& window) {
  std::vector<double> t;
  t.reserve(fit.changepoints.size());
  for (std::size_t i : fit.changepoints) t.push_back(grid_point(window, fit.alpha.size(), i + 1));
  return t;
}

StepFunction interpolate(const FusedLassoFit& fit, const Window& window) {
  window.validate();
  if (fit.alpha.empty()) throw ValidationError("interpolate: empty fit");
  const std::size_t m = fit.alpha.size();
  const double scale = window.length();
  std::vector<double> breaks;
  std::vector<double> levels{fit.alpha.front() / scale};
  for (std::size_t i : fit.changepoints) {
    if (i + 1 >= m) continue;  // only the point tau_max
    breaks.push_back(grid_point(window, m, i + 1));
    levels.push_back(fit.alpha[i] / scale);
  }
  return StepFunction(window, std::move(breaks), std::move(levels));
}

std::vector<double> reparametrized_check(std::span<const double> y, double lambda, const LassoOptions& options) {
  check_input(y, lambda);
  const std::size_t m = y.size();
  const double md = static_cast<double>(m);
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= md;
  if (m == 1) return {y.begin(), y.end()};

  // Column j (1-based, j = 2..m) of the cumulative design is 1(i >= j),
  // centred by its mean (m - j + 1) / m.
  std::vector<double> xbar(m + 1), norm2(m + 1), theta(m + 1, 0.0);
  for (std::size_t j = 2; j <= m; ++j) {
    xbar[j] = static_cast<double>(m - j + 1) / md;
    norm2[j] = static_cast<double>(m - j + 1) * static_cast<double>(j - 1) / md;
  }
  std::vector<double> resid(m);
  for (std::size_t i = 0; i < m; ++i) resid[i] = y[i] - ybar;
  const double threshold = 0.5 * md * lambda;

  auto update = [&](std::size_t j) {
    // X_j^c' r reduces to a tail sum because the residual sums to zero
    double rho = 0.0;
    for (std::size_t i = j - 1; i < m; ++i) rho += resid[i];
    rho += norm2[j] * theta[j];
    const double mag = std::max(std::abs(rho) - threshold, 0.0);
    const double fresh = mag == 0.0 ? 0.0 : std::copysign(mag, rho) / norm2[j];
    const double delta = fresh - theta[j];
    if (delta != 0.0) {
      for (std::size_t i = 0; i < m; ++i) resid[i] -= delta * ((i + 1 >= j ? 1.0 : 0.0) - xbar[j]);
      theta[j] = fresh;
    }
    return std::abs(delta);
  };

  double scale_ref = 1.0;
  for (double v : y) scale_ref = std::max(scale_ref, std::abs(v));
  std::size_t sweeps = 0;
  while (true) {
    // full sweep, then polish the active set until it settles
    double change = 0.0;
    for (std::size_t j = 2; j <= m; ++j) change = std::max(change, update(j));
    ++sweeps;
    if (change <= options.tol * scale_ref) break;
    while (sweeps < options.max_sweeps) {
      double active_change = 0.0;
      for (std::size_t j = 2; j <= m; ++j) {
        if (theta[j] != 0.0) active_change = std::max(active_change, update(j));
      }
      ++sweeps;
      if (active_change <= options.tol * scale_ref) break;
    }
    if (sweeps >= options.max_sweeps) {
      throw std::runtime_error("reparametrized lasso did not converge in " + std::to_string(sweeps) +
                               " sweeps");
    }
  }

  double intercept = ybar;
  for (std::size_t j = 2; j <= m; ++j) intercept -= xbar[j] * theta[j];
  std::vector<double> alpha(m);
  double acc = intercept;
  alpha[0] = acc;
  for (std::size_t j = 2; j <= m; ++j) {
    acc += theta[j];
    alpha[j - 1] = acc;
  }
  return alpha;
}

double max_normalized_partial_sum(std::span<const double> u) {
  std::vector<double> prefix(u.size() + 1, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) prefix[i + 1] = prefix[i] + u[i];
  double best = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    for (std::size_t l = k; l < u.size(); ++l) {
      const double v = std::abs(prefix[l + 1] - prefix[k]) / std::sqrt(static_cast<double>(l - k + 1));
      best = std::max(best, v);
    }
  }
  return best;
}

std::vector<double> elementwise_bound(std::span<const double> truth, double kappa, double lambda) {
  const std::size_t m = truth.size();
  if (m == 0) throw ValidationError("elementwise bound: empty truth");
  if (!(lambda > 0.0)) throw ValidationError("elementwise bound needs lambda > 0");
  const double md = static_cast<double>(m);
  // jump indices in 1-based form, bracketed by 1 and m + 1
  std::vector<std::size_t> jumps{1};
  for (std::size_t j = 2; j <= m; ++j) {
    if (truth[j - 1] != truth[j - 2]) jumps.push_back(j);
  }
  jumps.push_back(m + 1);
  std::vector<double> bound(m);
  std::size_t seg = 0;
  for (std::size_t j = 1; j <= m; ++j) {
    while (j >= jumps[seg + 1]) ++seg;
    const double lo = static_cast<double>(jumps[seg]);
    const double hi = static_cast<double>(jumps[seg + 1]);
    const double jd = static_cast<double>(j);
    const double d = std::min(jd + 1.0 - lo, hi - jd);
    const double r = hi - lo;
    bound[j - 1] = std::max({kappa / std::sqrt(d), kappa * kappa / (4.0 * md * lambda),
                             2.0 * md * lambda / r + 2.0 * kappa / std::sqrt(r)});
  }
  return bound;
}

bool elementwise_bound_check(const FusedLassoFit& fit, std::span<const double> y,
                             std::span<const double> truth, double lambda) {
  if (fit.alpha.size() != truth.size() || y.size() != truth.size()) {
    throw ValidationError("elementwise bound: fit, data and truth must share one grid");
  }
  std::vector<double> u(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) u[j] = y[j] - truth[j];
  const double kappa = max_normalized_partial_sum(u);
  const std::vector<double> bound = elementwise_bound(truth, kappa, lambda);
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const double err = std::abs(fit.alpha[j] - truth[j]);
    // rounding slack only; the bound itself is exact
    if (err > bound[j] + 1e-9 * (1.0 + bound[j])) return false;
  }
  return true;
}

}  // namespace pchaz
