#include "pchaz/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "pchaz/csv.hpp"
#include "pchaz/errors.hpp"

namespace pchaz::io {

namespace {

/// JSON has no infinity; +inf and NaN become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json summary(const Summary& s) {
  json j{{"count", s.count}, {"mean", number(s.mean)}};
  j["sd"] = s.sd ? number(*s.sd) : json(nullptr);
  return j;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ") + what + " JSON: " + e.what());
  }
}

}  // namespace

json to_json(const Window& w) { return json::array({w.tau_min, w.tau_max}); }

Window window_from_json(const json& j) {
  return guarded("window", [&] {
    Window w{j.at(0).get<double>(), j.at(1).get<double>()};
    w.validate();
    return w;
  });
}

json to_json(const StepFunction& f) {
  return {{"domain", to_json(f.domain())}, {"breaks", f.breaks()}, {"levels", f.levels()}};
}

StepFunction step_function_from_json(const json& j) {
  return guarded("step function", [&] {
    return StepFunction(window_from_json(j.at("domain")), j.at("breaks").get<std::vector<double>>(),
                        j.at("levels").get<std::vector<double>>());
  });
}

json to_json(const TuningResult& t) {
  return {{"lambda0", t.lambda0}, {"lambda", t.lambda},   {"q", t.q},
          {"seed", t.seed},       {"L", t.u_boot.size()}, {"u_boot", t.u_boot}};
}

TuningResult tuning_from_json(const json& j) {
  return guarded("tuning", [&] {
    TuningResult t;
    t.lambda0 = j.at("lambda0").get<double>();
    t.lambda = j.at("lambda").get<double>();
    t.q = j.at("q").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.u_boot = j.at("u_boot").get<std::vector<double>>();
    return t;
  });
}

json to_json(const CoxFit& c) {
  return {{"beta", c.beta},
          {"log_partial_likelihood", c.log_partial_likelihood},
          {"iterations", c.iterations},
          {"converged", c.converged}};
}

json to_json(const HazardFit& fit) {
  json gaps = json::array();
  for (const auto& [a, b] : fit.empty_risk) gaps.push_back({a, b});
  json j{{"hazard", to_json(fit.hazard)},
         {"hazard_raw", to_json(fit.hazard_raw)},
         {"window", to_json(fit.window)},
         {"grid_size", fit.increments.m},
         {"scale", fit.increments.scale},
         {"beta", fit.beta},
         {"lambda", fit.tuning.lambda},
         {"lambda0", fit.tuning.lambda0},
         {"seed", fit.tuning.seed},
         {"changepoint_times", changepoint_times(fit.fused, fit.window)},
         {"cumhaz_window_increment", fit.cumulative(fit.window.tau_max) - fit.cumulative(fit.window.tau_min)},
         {"integral_gap", fit.integral_gap},
         {"empty_risk_intervals", gaps},
         {"warnings", fit.warnings}};
  j["cox"] = fit.cox ? to_json(*fit.cox) : json(nullptr);
  return j;
}

json to_json(const IllnessDeathModel& m) {
  return {{"a01", to_json(m.a01)}, {"a02", to_json(m.a02)}, {"a12", to_json(m.a12)}};
}

IllnessDeathModel model_from_json(const json& j) {
  return guarded("model", [&] {
    IllnessDeathModel m{step_function_from_json(j.at("a01")), step_function_from_json(j.at("a02")),
                        step_function_from_json(j.at("a12"))};
    m.validate();
    return m;
  });
}

json to_json(const StudyReport& r, bool include_runs) {
  json j{{"scenario", r.scenario},
         {"n", r.n},
         {"replications", r.options.replications},
         {"seed", r.options.seed},
         {"q", r.options.q},
         {"k_max", r.options.k_max},
         {"L", r.options.l_boot},
         {"failed", r.failed},
         {"empty_estimates", r.empty_estimates},
         {"l2_sq", summary(r.l2_sq)},
         {"d_asym", summary(r.d_asym)},
         {"snr", summary(r.snr)},
         {"censored_fraction", summary(r.censored_fraction)}};
  if (include_runs) {
    json runs = json::array();
    for (const RunResult& run : r.runs) {
      json x{{"index", run.index}, {"seed", run.seed}, {"ok", run.ok}};
      if (run.ok) {
        x["l2_sq"] = run.l2_sq;
        x["d_asym"] = number(run.d_asym);
        x["snr"] = number(run.snr);
        x["censored_fraction"] = run.censored_fraction;
        x["lambda0"] = run.lambda0;
        x["lambda"] = run.lambda;
        x["changepoints"] = run.changepoints;
      } else {
        x["error"] = run.error;
      }
      runs.push_back(std::move(x));
    }
    j["runs"] = std::move(runs);
  }
  return j;
}

void write_step_csv(std::ostream& out, const StepFunction& f) {
  out << "t,level\n";
  const auto& b = f.breaks();
  const auto& l = f.levels();
  out << csv::format(f.domain().tau_min) << ',' << csv::format(l.front()) << '\n';
  for (std::size_t k = 0; k < b.size(); ++k) {
    out << csv::format(b[k]) << ',' << csv::format(l[k]) << '\n';
    out << csv::format(b[k]) << ',' << csv::format(l[k + 1]) << '\n';
  }
  out << csv::format(f.domain().tau_max) << ',' << csv::format(l.back()) << '\n';
}

StepFunction read_step_csv(std::istream& in) {
  const csv::Table t = csv::read(in);
  const int ct = t.column("t");
  const int cl = t.column("level");
  if (ct < 0 || cl < 0) throw SchemaError("step CSV needs columns t and level");
  if (t.rows.size() < 2 || t.rows.size() % 2 != 0) throw ValidationError("step CSV needs an even number (>= 2) of rows");
  std::vector<double> ts, ls;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ts.push_back(csv::parse_double(t.rows[r][static_cast<std::size_t>(ct)], static_cast<long>(r + 1)));
    ls.push_back(csv::parse_double(t.rows[r][static_cast<std::size_t>(cl)], static_cast<long>(r + 1)));
  }
  std::vector<double> breaks, levels{ls.front()};
  for (std::size_t r = 1; r + 1 < ts.size(); r += 2) {
    if (ts[r] != ts[r + 1]) throw ValidationError("step CSV corner rows must come in pairs");
    breaks.push_back(ts[r]);
    levels.push_back(ls[r + 1]);
  }
  return StepFunction(Window{ts.front(), ts.back()}, std::move(breaks), std::move(levels));
}

void write_cumhaz_csv(std::ostream& out, const BreslowCurve& curve) {
  out << "time,cumhaz\n0,0\n";
  double acc = 0.0;
  for (std::size_t k = 0; k < curve.jump_times().size(); ++k) {
    acc += curve.jump_sizes()[k];
    out << csv::format(curve.jump_times()[k]) << ',' << csv::format(acc) << '\n';
  }
}

BreslowCurve read_cumhaz_csv(std::istream& in) {
  const csv::Table t = csv::read(in);
  const int ct = t.column("time");
  const int cc = t.column("cumhaz");
  if (ct < 0 || cc < 0) throw SchemaError("cumulative hazard CSV needs columns time and cumhaz");
  std::vector<double> times, sizes;
  double prev = 0.0;
  double tau = 0.0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double time = csv::parse_double(t.rows[r][static_cast<std::size_t>(ct)], static_cast<long>(r + 1));
    const double value = csv::parse_double(t.rows[r][static_cast<std::size_t>(cc)], static_cast<long>(r + 1));
    tau = std::max(tau, time);
    if (r == 0 && time == 0.0 && value == 0.0) continue;
    times.push_back(time);
    sizes.push_back(value - prev);
    prev = value;
  }
  return BreslowCurve(std::move(times), std::move(sizes), tau);
}

void write_curves_csv(std::ostream& out, const SurvivalCurve& pfs, const SurvivalCurve& os) {
  if (pfs.grid != os.grid) throw ValidationError("PFS and OS curves must share one grid");
  out << "t,S_PFS,S_OS\n";
  for (std::size_t i = 0; i < pfs.grid.size(); ++i) {
    out << csv::format(pfs.grid[i]) << ',' << csv::format(pfs.values[i]) << ',' << csv::format(os.values[i])
        << '\n';
  }
}

void write_curve_csv(std::ostream& out, const SurvivalCurve& c) {
  out << "t,S\n";
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    out << csv::format(c.grid[i]) << ',' << csv::format(c.values[i]) << '\n';
  }
}

SurvivalCurve read_curve_csv(std::istream& in, const std::string& column) {
  const csv::Table t = csv::read(in);
  const int ct = t.column("t");
  const int cs = t.column(column);
  if (ct < 0 || cs < 0) throw SchemaError("curve CSV needs columns t and " + column);
  SurvivalCurve c;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    c.grid.push_back(csv::parse_double(t.rows[r][static_cast<std::size_t>(ct)], static_cast<long>(r + 1)));
    c.values.push_back(csv::parse_double(t.rows[r][static_cast<std::size_t>(cs)], static_cast<long>(r + 1)));
  }
  return c;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace pchaz::io
