// Command-line front end: fit, multistate, simulate, curves, generate, bench.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pchaz/csv.hpp"
#include "pchaz/errors.hpp"
#include "pchaz/event_data.hpp"
#include "pchaz/flsa.hpp"
#include "pchaz/io.hpp"
#include "pchaz/multistate.hpp"
#include "pchaz/pipeline.hpp"
#include "pchaz/simharness.hpp"

namespace fs = std::filesystem;
using namespace pchaz;

namespace {

constexpr const char* kSeedEnv = "PCHAZ_SEED";

struct Common {
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::string out = ".";
};

struct TuningFlags {
  double q = 0.9;
  std::size_t k_max = 20;
  std::size_t l_boot = 1000;
};

struct WindowFlags {
  std::vector<double> window;
  double p_low = -1.0;
  double p_high = 0.975;
  std::size_t grid = 0;
};

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv(kSeedEnv)) {
    const std::string text(env);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ValidationError(std::string(kSeedEnv) + " is not an unsigned integer: " + text);
    }
    return v;
  }
  std::random_device rd;
  const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << v << '\n';
  return v;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory " + dir);
  return fs::path(dir);
}

template <class W>
void write_file(const fs::path& path, W&& writer) {
  std::ostringstream os;
  writer(os);
  io::write_text_file(path.string(), os.str());
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, std::string("RNG seed (default: $") + kSeedEnv + ", else random and printed)");
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  app->add_flag("--quiet", c.quiet, "suppress warnings");
}

void add_tuning(CLI::App* app, TuningFlags& t, std::size_t default_l) {
  t.l_boot = default_l;
  app->add_option("--q", t.q, "bootstrap quantile level")->capture_default_str();
  app->add_option("--kmax", t.k_max, "change points of the pilot fit")->capture_default_str();
  app->add_option("--L", t.l_boot, "bootstrap draws")->capture_default_str();
}

void add_window(CLI::App* app, WindowFlags& w) {
  app->add_option("--window", w.window, "explicit window tmin,tmax")->delimiter(',')->expected(2);
  app->add_option("--p-low", w.p_low, "lower event-time quantile of the window");
  app->add_option("--p-high,--p", w.p_high, "upper event-time quantile of the window")->capture_default_str();
  app->add_option("--grid", w.grid, "grid size m (default: number of records)");
}

FitConfig make_fit_config(const WindowFlags& w, const TuningFlags& t, std::uint64_t seed) {
  FitConfig c;
  if (!w.window.empty()) c.window = Window{w.window[0], w.window[1]};
  if (w.p_low >= 0.0) c.p_low = w.p_low;
  c.p_high = w.p_high;
  if (w.grid > 0) c.grid = w.grid;
  c.tuning = {t.q, t.k_max, t.l_boot, seed};
  return c;
}

void print_warnings(const Common& c, const std::string& prefix, const std::vector<std::string>& warnings) {
  if (c.quiet) return;
  for (const auto& w : warnings) std::cerr << "warning: " << prefix << w << '\n';
}

void write_hazard_artifacts(const fs::path& dir, const std::string& stem, const HazardFit& fit) {
  write_file(dir / (stem + ".json"), [&](std::ostream& os) { os << io::to_json(fit).dump(2) << '\n'; });
  write_file(dir / (stem + "_steps.csv"), [&](std::ostream& os) { io::write_step_csv(os, fit.hazard); });
}

// ---- fit -----------------------------------------------------------------

struct FitArgs {
  Common common;
  TuningFlags tuning;
  WindowFlags window;
  std::string input;
  std::vector<double> beta;
  bool ignore_covariates = false;
  SurvivalSchema schema;
};

int cmd_fit(const FitArgs& a) {
  const std::uint64_t seed = resolve_seed(a.common);
  const SurvivalFrame frame = parse_survival_csv(a.input, a.schema);
  FitConfig cfg = make_fit_config(a.window, a.tuning, seed);
  if (!a.beta.empty()) {
    cfg.beta_source = BetaSource::supplied;
    cfg.beta = a.beta;
  } else if (a.ignore_covariates) {
    cfg.beta_source = BetaSource::none;
  }
  const HazardFit fit = fit_hazard(frame, cfg);
  const fs::path dir = prepare_out(a.common.out);
  write_hazard_artifacts(dir, "hazard", fit);
  write_file(dir / "cumhaz.csv", [&](std::ostream& os) { io::write_cumhaz_csv(os, fit.cumulative); });
  write_file(dir / "tuning.json", [&](std::ostream& os) { os << io::to_json(fit.tuning).dump(2) << '\n'; });
  print_warnings(a.common, "", fit.warnings);
  std::cout << "lambda " << csv::format(fit.tuning.lambda) << ", " << fit.hazard.breaks().size()
            << " change points, window [" << csv::format(fit.window.tau_min) << ", "
            << csv::format(fit.window.tau_max) << "]\n";
  return 0;
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  Common common;
  TuningFlags tuning;
  std::vector<std::string> scenarios{"A1"};
  std::vector<std::size_t> sizes{1000};
  std::size_t reps = 200;
  std::size_t threads = 1;
  bool runs_json = true;
};

int cmd_simulate(const SimulateArgs& a) {
  if (a.reps == 0) throw ValidationError("--reps must be at least 1");
  const std::uint64_t seed = resolve_seed(a.common);
  std::vector<std::string> names = a.scenarios;
  if (names.size() == 1 && names[0] == "all") names = scenario_names();
  std::vector<Scenario> scenarios;
  for (const auto& name : names) {
    for (std::size_t n : a.sizes) scenarios.push_back(named_scenario(name, n));
  }
  const fs::path dir = prepare_out(a.common.out);
  std::vector<StudyReport> reports;
  io::json all = io::json::array();
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    StudyOptions o;
    o.replications = a.reps;
    o.seed = substream_seed(seed, k);
    o.threads = a.threads;
    o.q = a.tuning.q;
    o.k_max = a.tuning.k_max;
    o.l_boot = a.tuning.l_boot;
    reports.push_back(run_study(scenarios[k], o));
    const StudyReport& r = reports.back();
    all.push_back(io::to_json(r, a.runs_json));
    if (!a.common.quiet && r.failed > 0) {
      std::cerr << "warning: " << r.scenario << "/n=" << r.n << ": " << r.failed << " failed replications\n";
    }
  }
  write_file(dir / "study_report.csv", [&](std::ostream& os) { write_study_table(os, reports); });
  write_file(dir / "study_report.json", [&](std::ostream& os) {
    os << io::json{{"seed", seed}, {"studies", all}}.dump(2) << '\n';
  });
  write_study_table(std::cout, reports);
  return 0;
}

// ---- multistate ----------------------------------------------------------

struct MultistateArgs {
  Common common;
  TuningFlags tuning;
  WindowFlags window;
  std::string input;
  std::string censor_token = kDefaultCensorToken;
  std::size_t curve_points = 200;
};

std::vector<double> curve_grid(double t_max, std::size_t points) {
  std::vector<double> g;
  for (std::size_t i = 0; i <= points; ++i) g.push_back(t_max * static_cast<double>(i) / static_cast<double>(points));
  return g;
}

int cmd_multistate(const MultistateArgs& a) {
  if (a.curve_points == 0) throw ValidationError("--points must be positive");
  const std::uint64_t seed = resolve_seed(a.common);
  const auto records = parse_multistate_csv(a.input, a.censor_token);
  const FitConfig base = make_fit_config(a.window, a.tuning, seed);
  IllnessDeathConfig cfg = IllnessDeathConfig::uniform(base);
  if (a.window.p_low >= 0.0) cfg.t12.p_low = a.window.p_low;
  cfg.t01.tuning.seed = substream_seed(seed, 1);
  cfg.t02.tuning.seed = substream_seed(seed, 2);
  cfg.t12.tuning.seed = substream_seed(seed, 3);
  const IllnessDeathFit fit = fit_illness_death(records, cfg);

  const fs::path dir = prepare_out(a.common.out);
  write_hazard_artifacts(dir, "hazard_01", fit.f01);
  write_hazard_artifacts(dir, "hazard_02", fit.f02);
  write_hazard_artifacts(dir, "hazard_12", fit.f12);
  write_file(dir / "model.json", [&](std::ostream& os) { os << io::to_json(fit.model).dump(2) << '\n'; });

  const SurvivalFrame pfs_frame = first_exit_frame(records);
  const SurvivalFrame os_frame = absorption_frame(records);
  double t_max = 0.0;
  for (const auto& r : records) t_max = std::max(t_max, r.t_stop);
  const auto grid = curve_grid(t_max, a.curve_points);
  const auto [pfs, os] = survival_curves(fit.model, grid);
  write_file(dir / "survival_curves.csv", [&](std::ostream& s) { io::write_curves_csv(s, pfs, os); });
  write_file(dir / "km_pfs.csv", [&](std::ostream& s) { io::write_curve_csv(s, kaplan_meier(pfs_frame)); });
  write_file(dir / "km_os.csv", [&](std::ostream& s) { io::write_curve_csv(s, kaplan_meier(os_frame)); });

  print_warnings(a.common, "transition (0,1): ", fit.f01.warnings);
  print_warnings(a.common, "transition (0,2): ", fit.f02.warnings);
  print_warnings(a.common, "transition (1,2): ", fit.f12.warnings);
  for (const auto& [name, f] : {std::pair{"0->1", &fit.f01}, std::pair{"0->2", &fit.f02}, std::pair{"1->2", &fit.f12}}) {
    std::cout << name << ": lambda " << csv::format(f->tuning.lambda) << ", " << f->hazard.breaks().size()
              << " change points\n";
  }
  return 0;
}

// ---- curves --------------------------------------------------------------

struct CurvesArgs {
  std::string model;
  double t_max = 0.0;
  std::size_t points = 200;
  std::string out = "survival_curves.csv";
};

int cmd_curves(const CurvesArgs& a) {
  if (!(a.t_max > 0.0)) throw ValidationError("--tmax must be positive");
  if (a.points == 0) throw ValidationError("--points must be positive");
  const IllnessDeathModel model = io::model_from_json(io::read_json_file(a.model));
  const auto [pfs, os] = survival_curves(model, curve_grid(a.t_max, a.points));
  if (a.out == "-") {
    io::write_curves_csv(std::cout, pfs, os);
  } else {
    write_file(a.out, [&](std::ostream& s) { io::write_curves_csv(s, pfs, os); });
  }
  return 0;
}

// ---- generate ------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::string scenario = "A1";
  std::size_t n = 1000;
  std::string model;
  double censoring_rate = 0.5;
  std::string out = "-";
};

int cmd_generate(const GenerateArgs& a) {
  if (a.n == 0) throw ValidationError("--n must be at least 1");
  const std::uint64_t seed = resolve_seed(a.common);
  std::ostringstream os;
  if (!a.model.empty()) {
    const IllnessDeathModel model = io::model_from_json(io::read_json_file(a.model));
    write_multistate_csv(os, simulate_illness_death(model, a.n, a.censoring_rate, seed));
  } else {
    write_survival_csv(os, gen_scenario(named_scenario(a.scenario, a.n), seed));
  }
  if (a.out == "-") {
    std::cout << os.str();
  } else {
    io::write_text_file(a.out, os.str());
  }
  return 0;
}

// ---- bench ---------------------------------------------------------------

struct BenchArgs {
  std::vector<std::size_t> sizes{1000, 10000, 100000, 1000000};
  std::size_t reps = 3;
};

int cmd_bench(const BenchArgs& a) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };
  std::cout << "n,flsa_solve_ms,flsa_path_ms,fit_hazard_ms\n";
  for (std::size_t n : a.sizes) {
    if (n < 2) throw ValidationError("bench sizes must be at least 2");
    double solve = 0.0, path = 0.0, fit = 0.0;
    for (std::size_t r = 0; r < a.reps; ++r) {
      Rng rng(substream_seed(17, r));
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = (i < n / 4 ? 4.0 : 1.0) + rng.normal();
      auto t0 = clock::now();
      const auto f = flsa_solve(y, 0.05);
      solve += ms(clock::now() - t0);
      t0 = clock::now();
      const auto p = flsa_path(y);
      path += ms(clock::now() - t0);
      if (f.alpha.empty() || p.empty()) return 1;
      if (n <= 100000) {
        const SurvivalFrame frame = gen_scenario(named_scenario("A2", n), substream_seed(18, r));
        FitConfig cfg;
        cfg.window = Window{0.0, 1.0};
        cfg.tuning = {0.9, 20, 100, r};
        t0 = clock::now();
        fit_hazard(frame, cfg);
        fit += ms(clock::now() - t0);
      }
    }
    const double k = static_cast<double>(a.reps);
    std::cout << n << ',' << csv::format(solve / k) << ',' << csv::format(path / k) << ','
              << (n <= 100000 ? csv::format(fit / k) : std::string()) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise-constant hazard estimation by fused lasso on Breslow increments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI/TOML file; sections name subcommands");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a hazard to survival data (CSV: [entry,]time,status,covariates...)");
  fit_cmd->add_option("data", fit.input, "survival CSV")->required()->check(CLI::ExistingFile);
  add_common(fit_cmd, fit.common);
  add_tuning(fit_cmd, fit.tuning, 1000);
  add_window(fit_cmd, fit.window);
  fit_cmd->add_option("--beta", fit.beta, "use these Cox coefficients instead of fitting")->delimiter(',');
  fit_cmd->add_flag("--ignore-covariates", fit.ignore_covariates, "fit without the covariate adjustment");
  fit_cmd->add_option("--time-col", fit.schema.time)->capture_default_str();
  fit_cmd->add_option("--status-col", fit.schema.status)->capture_default_str();
  fit_cmd->add_option("--entry-col", fit.schema.entry)->capture_default_str();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of the named scenarios");
  add_common(sim_cmd, sim.common);
  add_tuning(sim_cmd, sim.tuning, 100);
  sim_cmd->add_option("--scenario", sim.scenarios, "A1, B1, A2, B2 (comma list) or all")->delimiter(',');
  sim_cmd->add_option("--n", sim.sizes, "sample sizes (comma list)")->delimiter(',');
  sim_cmd->add_option("--reps", sim.reps, "replications per cell")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_flag("!--no-runs", sim.runs_json, "omit per-run records from the JSON report");

  MultistateArgs ms;
  auto* ms_cmd = app.add_subcommand("multistate", "illness-death fit from long-format transitions");
  ms_cmd->add_option("data", ms.input, "CSV with id,from,to,t_start,t_stop")->required()->check(CLI::ExistingFile);
  add_common(ms_cmd, ms.common);
  add_tuning(ms_cmd, ms.tuning, 1000);
  add_window(ms_cmd, ms.window);
  ms_cmd->add_option("--censor-token", ms.censor_token)->capture_default_str();
  ms_cmd->add_option("--points", ms.curve_points, "survival curve grid intervals")->capture_default_str();

  CurvesArgs curves;
  auto* curves_cmd = app.add_subcommand("curves", "PFS/OS curves of a saved illness-death model");
  curves_cmd->add_option("model", curves.model, "model.json written by multistate")->required()->check(CLI::ExistingFile);
  curves_cmd->add_option("--tmax", curves.t_max)->required();
  curves_cmd->add_option("--points", curves.points)->capture_default_str();
  curves_cmd->add_option("--out", curves.out, "CSV path or - for stdout")->capture_default_str();

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "simulate one data set");
  add_common(gen_cmd, gen.common);
  gen.common.out = "-";
  gen_cmd->add_option("--scenario", gen.scenario)->capture_default_str();
  gen_cmd->add_option("--n", gen.n)->capture_default_str();
  gen_cmd->add_option("--model", gen.model, "illness-death model.json; writes transitions instead");
  gen_cmd->add_option("--censoring", gen.censoring_rate, "censoring rate for --model")->capture_default_str();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "time the solver, the path and the full fit");
  bench_cmd->add_option("--n", bench.sizes, "sizes (comma list)")->delimiter(',');
  bench_cmd->add_option("--reps", bench.reps)->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (sim_cmd->parsed()) return cmd_simulate(sim);
    if (ms_cmd->parsed()) return cmd_multistate(ms);
    if (curves_cmd->parsed()) return cmd_curves(curves);
    if (gen_cmd->parsed()) {
      gen.out = gen.common.out;
      return cmd_generate(gen);
    }
    if (bench_cmd->parsed()) return cmd_bench(bench);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
