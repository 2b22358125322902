#include "regdiv/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "regdiv/core_math.hpp"
#include "regdiv/io.hpp"
#include "regdiv/simulator.hpp"
#include "regdiv/value_functions.hpp"
#include "regdiv/verification.hpp"

namespace regdiv::cli {
namespace {

using nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelOptions {
  std::optional<double> mu;
  std::optional<double> sigma2;
  std::optional<double> sigma;
  std::optional<double> alpha;
  std::optional<double> k;
  double b_r = 0.0;
  std::string preset;
};

struct OutputOptions {
  std::string format;
  int precision = 0;
};

void add_model_options(CLI::App* app, ModelOptions& m) {
  app->add_option("--mu", m.mu, "drift per unit time (> 0)");
  app->add_option("--sigma2", m.sigma2, "variance per unit time (> 0)");
  app->add_option("--sigma", m.sigma, "volatility, alternative to --sigma2");
  app->add_option("--alpha", m.alpha, "discount rate (> 0)");
  app->add_option("--k", m.k, "proportional capital-injection cost (> 1)");
  app->add_option("--br", m.b_r, "dividend payout barrier (>= 0)");
  app->add_option("--preset", m.preset, "named parameter set")
      ->check(CLI::IsMember({"paper"}));
}

void add_output_options(CLI::App* app, OutputOptions& o, const std::string& default_format) {
  o.format = default_format;
  app->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  app->add_option("--precision", o.precision,
                  "significant digits (0: shortest round-trip representation)")
      ->check(CLI::NonNegativeNumber);
}

ModelParams build_params(const ModelOptions& m) {
  double mu = 0.0, sigma2 = 0.0, alpha = 0.0, k = 0.0;
  if (m.preset == "paper") {
    mu = 0.04;
    sigma2 = 0.15;
    alpha = 0.05;
    k = 1.01;
  } else if (!m.mu || !m.alpha || !m.k || !(m.sigma2 || m.sigma)) {
    throw ParameterError("--mu, --sigma2 (or --sigma), --alpha and --k are required without --preset");
  }
  if (m.mu) mu = *m.mu;
  if (m.alpha) alpha = *m.alpha;
  if (m.k) k = *m.k;
  if (m.sigma2 && m.sigma) throw ParameterError("give either --sigma2 or --sigma, not both");
  if (m.sigma2) sigma2 = *m.sigma2;
  if (m.sigma) {
    if (!(*m.sigma > 0.0)) throw ParameterError("sigma must be positive");
    sigma2 = *m.sigma * *m.sigma;
  }
  return ModelParams::from_sigma2(mu, sigma2, alpha, k, m.b_r);
}

std::string num(double v, int precision) { return format_number(v, precision); }

// --- solve -----------------------------------------------------------------

json solution_json(const Solution& sol, const std::vector<double>& xs) {
  const StrategySpec strategy = optimal_strategy(sol);
  json j{{"params", sol.params},
         {"roots", sol.roots},
         {"regime", sol.regime},
         {"barriers", sol.barriers},
         {"strategy", strategy}};
  json values = json::array();
  for (double x : xs) {
    values.push_back({{"x", x}, {"V", eval_V(x, sol)}, {"G", eval_G(x, sol)}, {"H", eval_H(x, sol)}});
  }
  j["values"] = values;
  return j;
}

int cmd_solve(const ModelOptions& m, const OutputOptions& o, const std::vector<double>& xs,
              std::ostream& out) {
  const Solution sol = solve(build_params(m));
  if (o.format == "json") {
    out << solution_json(sol, xs).dump(2) << '\n';
    return kOk;
  }
  const int p = o.precision;
  const auto& b = sol.barriers;
  const StrategySpec s = optimal_strategy(sol);
  out << "r1             " << num(sol.roots.r1, p) << '\n'
      << "r2             " << num(sol.roots.r2, p) << '\n'
      << "k_critical     " << num(sol.regime.k_critical, p) << '\n'
      << "regime         " << to_string(sol.regime.regime) << '\n'
      << "b_star         " << num(b.b_star, p) << '\n'
      << "b_double_star  " << num(b.b_double_star, p) << '\n';
  if (b.b_hat) out << "b_hat          " << num(*b.b_hat, p) << '\n';
  out << "b_effective_G  " << num(b.b_effective_G, p) << '\n'
      << "b_effective_H  " << num(b.b_effective_H, p) << '\n'
      << "strategy       " << to_string(s.kind) << " upper=" << num(s.upper, p);
  if (s.lower) out << " lower=" << num(*s.lower, p);
  if (s.both_optimal) out << " (both strategies optimal)";
  out << '\n';
  for (double x : xs) {
    out << "V(" << num(x, p) << ")" << std::string(x < 10 ? 6 : 5, ' ') << num(eval_V(x, sol), p)
        << '\n';
  }
  return kOk;
}

// --- sweep -----------------------------------------------------------------

struct SweepOptions {
  std::string mode = "surplus";
  std::vector<double> br_values;
  std::vector<double> x_values;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  std::size_t grid_points = 501;
  std::string out_dir;
};

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << content;
  f.close();
  if (!f) throw IoError("failed writing " + path.string());
}

int cmd_sweep(const ModelOptions& m, const OutputOptions& o, const SweepOptions& s,
              std::ostream& out) {
  const Solution base = solve(build_params(m));
  const bool surplus = s.mode == "surplus";
  const double lo = s.grid_min.value_or(0.0);
  const double hi = s.grid_max.value_or(surplus ? 2.5 : 8.0);
  const std::vector<double> grid = linspace(lo, hi, s.grid_points);
  if (grid.empty()) throw GridError("grid is empty");

  std::vector<double> fixed = surplus ? s.br_values : s.x_values;
  if (fixed.empty()) fixed.push_back(surplus ? m.b_r : 1.0);

  const std::filesystem::path dir = output_dir(s.out_dir);
  const std::string ext = o.format == "json" ? ".json" : ".csv";
  for (double v : fixed) {
    const ValueCurve curve = surplus ? sweep_surplus(base.with_payout_barrier(v), grid)
                                     : sweep_payout_barrier(base, v, grid);
    std::ostringstream content;
    if (o.format == "json") {
      content << json(curve).dump(2) << '\n';
    } else {
      write_curve_csv(content, curve, o.precision);
    }
    const auto path = dir / ((surplus ? "surplus_br_" : "barrier_x_") + format_number(v) + ext);
    write_file(path, content.str());
    out << path.string() << '\n';
  }
  return kOk;
}

// --- simulate --------------------------------------------------------------

struct SimulateOptions {
  std::string strategy = "auto";
  std::optional<double> barrier;
  double x0 = 1.0;
  std::uint64_t paths = 100000;
  double dt = 5e-3;
  std::optional<double> horizon;
  double truncation_tol = 1e-9;
  std::uint64_t seed = 1;
  bool no_antithetic = false;
  unsigned threads = 0;
  std::string trace;
  bool ruin_moments = false;
  double moment_horizon = 2000.0;
  int study_levels = 0;
};

int cmd_simulate(const ModelOptions& m, const OutputOptions& o, const SimulateOptions& s,
                 std::ostream& out) {
  const Solution sol = solve(build_params(m));
  StrategySpec strategy = optimal_strategy(sol);
  if (s.strategy == "upper") {
    strategy = StrategySpec{StrategyKind::UpperBarrier, sol.barriers.b_effective_G, std::nullopt};
  } else if (s.strategy == "double") {
    strategy = StrategySpec{StrategyKind::DoubleBarrier, sol.barriers.b_effective_H, 0.0};
  }
  if (s.barrier) strategy.upper = *s.barrier;

  SimConfig cfg;
  cfg.dt = s.dt;
  cfg.truncation_tol = s.truncation_tol;
  cfg.horizon = s.horizon.value_or(SimConfig::horizon_for(sol.params.alpha(), s.truncation_tol));
  cfg.n_paths = s.paths;
  cfg.seed = s.seed;
  cfg.antithetic = !s.no_antithetic;
  cfg.threads = s.threads;

  const SimEstimate est = simulate(sol.params, strategy, s.x0, cfg);
  const double closed_form = value_of(strategy, sol)(s.x0);
  json j{{"strategy", strategy},
         {"x0", s.x0},
         {"estimate", est},
         {"closed_form", closed_form},
         {"V", eval_V(s.x0, sol)}};
  if (s.ruin_moments) {
    SimConfig mcfg = cfg;
    mcfg.horizon = s.moment_horizon;
    j["ruin_moments"] = estimate_ruin_moments(sol.params, strategy, s.x0, mcfg);
  }
  if (s.study_levels >= 2) {
    j["dt_study"] = dt_halving_study(sol.params, strategy, s.x0, cfg, s.study_levels);
  }
  if (!s.trace.empty()) {
    std::ofstream f(s.trace);
    if (!f) throw IoError("cannot open " + s.trace + " for writing");
    const auto rows = trace_path(sol.params, strategy, s.x0, cfg);
    write_trace_csv(f, rows);
    if (!f) throw IoError("failed writing " + s.trace);
  }

  if (o.format == "json") {
    out << j.dump(2) << '\n';
    return kOk;
  }
  const int p = o.precision == 0 ? 8 : o.precision;
  out << std::setprecision(p);
  out << "strategy        " << to_string(strategy.kind) << " upper=" << strategy.upper << '\n'
      << "x0              " << s.x0 << '\n'
      << "estimate        " << est.mean << " +/- " << est.std_error << " (stderr)\n"
      << "closed form     " << closed_form << '\n'
      << "V(x0)           " << eval_V(s.x0, sol) << '\n'
      << "paths           " << est.n_paths << '\n'
      << "ruin fraction   " << est.ruin_fraction << '\n';
  if (j.contains("ruin_moments")) {
    const auto& rm = j["ruin_moments"];
    for (const auto& mo : rm["moments"]) {
      out << "E[tau^" << mo["order"].get<int>() << "]        " << mo["value"].get<double>()
          << " +/- " << mo["std_error"].get<double>() << '\n';
    }
    out << "censored        " << rm["censored_fraction"].get<double>() << '\n';
  }
  if (j.contains("dt_study")) {
    for (const auto& l : j["dt_study"]["levels"]) {
      out << "dt=" << l["dt"].get<double>() << "  mean=" << l["mean"].get<double>() << " +/- "
          << l["std_error"].get<double>() << '\n';
    }
    out << "sqrt(dt) constant " << j["dt_study"]["sqrt_dt_constant"].get<double>() << '\n';
  }
  return kOk;
}

// --- verify ----------------------------------------------------------------

struct VerifyCliOptions {
  std::vector<double> br_values;
  std::size_t ode_points = 1000;
  std::size_t inequality_points = 10001;
};

int cmd_verify(const ModelOptions& m, const OutputOptions& o, const VerifyCliOptions& v,
               std::ostream& out) {
  const Solution base = solve(build_params(m));
  std::vector<double> brs = v.br_values;
  if (brs.empty()) brs.push_back(m.b_r);
  VerifyOptions opts;
  opts.ode_points = v.ode_points;
  opts.inequality_points = v.inequality_points;

  bool all_passed = true;
  json reports = json::array();
  std::ostringstream table;
  table << std::left << std::setw(14) << "b_r" << std::setw(16) << "ode_residual"
        << std::setw(16) << "boundary_max" << std::setw(12) << "violations" << "result\n";
  for (double b_r : brs) {
    const VerificationReport r = verify_solution(base.with_payout_barrier(b_r), opts);
    all_passed = all_passed && r.passed;
    double worst = 0.0;
    for (const auto& [key, err] : r.boundary_errors) worst = std::max(worst, err);
    table << std::setw(14) << format_number(b_r, 8) << std::setw(16)
          << format_number(r.max_ode_residual, 3) << std::setw(16) << format_number(worst, 3)
          << std::setw(12) << r.inequality_violations.size() << (r.passed ? "PASS" : "FAIL")
          << '\n';
    json jr = r;
    jr["b_r"] = b_r;
    reports.push_back(jr);
  }
  if (o.format == "json") {
    out << json{{"params", base.params}, {"reports", reports}, {"passed", all_passed}}.dump(2)
        << '\n';
  } else {
    out << table.str() << (all_passed ? "verification passed" : "verification FAILED") << '\n';
  }
  return all_passed ? kOk : kVerificationFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal dividends and capital injection under a dividend payout barrier"};
  app.require_subcommand(1);

  ModelOptions model;
  OutputOptions output;

  auto* solve_cmd = app.add_subcommand("solve", "barriers, regime, optimal strategy and V(x)");
  std::vector<double> solve_xs;
  add_model_options(solve_cmd, model);
  add_output_options(solve_cmd, output, "text");
  solve_cmd->add_option("--x0", solve_xs, "surplus levels at which to report V");

  auto* sweep_cmd = app.add_subcommand("sweep", "G, H, V curves as CSV/JSON files");
  SweepOptions sweep_opts;
  add_model_options(sweep_cmd, model);
  add_output_options(sweep_cmd, output, "csv");
  sweep_cmd->add_option("--mode", sweep_opts.mode, "surplus: x-grid per b_r; barrier: b_r-grid per x")
      ->check(CLI::IsMember({"surplus", "barrier"}));
  sweep_cmd->add_option("--br-values", sweep_opts.br_values, "payout barriers (surplus mode)");
  sweep_cmd->add_option("--x-values", sweep_opts.x_values, "surplus levels (barrier mode)");
  sweep_cmd->add_option("--grid-min", sweep_opts.grid_min, "grid start (default 0)");
  sweep_cmd->add_option("--grid-max", sweep_opts.grid_max, "grid end (default 2.5 / 8)");
  sweep_cmd->add_option("--grid-points", sweep_opts.grid_points, "grid size (default 501)");
  sweep_cmd->add_option("--out-dir", sweep_opts.out_dir,
                        std::string("output directory (default $") + kOutputDirEnv + " or .)");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of a strategy's value");
  SimulateOptions sim_opts;
  add_model_options(sim_cmd, model);
  add_output_options(sim_cmd, output, "text");
  sim_cmd->add_option("--strategy", sim_opts.strategy, "auto | upper | double")
      ->check(CLI::IsMember({"auto", "upper", "double"}));
  sim_cmd->add_option("--barrier", sim_opts.barrier, "override the reflection barrier");
  sim_cmd->add_option("--x0", sim_opts.x0, "initial surplus");
  sim_cmd->add_option("--paths", sim_opts.paths, "number of paths");
  sim_cmd->add_option("--dt", sim_opts.dt, "time step");
  sim_cmd->add_option("--horizon", sim_opts.horizon, "truncation time (default from --truncation-tol)");
  sim_cmd->add_option("--truncation-tol", sim_opts.truncation_tol, "bound on exp(-alpha * horizon)");
  sim_cmd->add_option("--seed", sim_opts.seed, "RNG seed");
  sim_cmd->add_flag("--no-antithetic", sim_opts.no_antithetic, "disable antithetic pairs");
  sim_cmd->add_option("--threads", sim_opts.threads, "worker threads (0: all cores)");
  sim_cmd->add_option("--trace", sim_opts.trace, "write one path as CSV t,x,dD,dC");
  sim_cmd->add_flag("--ruin-moments", sim_opts.ruin_moments, "estimate E[tau^n] (upper barrier)");
  sim_cmd->add_option("--moment-horizon", sim_opts.moment_horizon, "horizon for ruin moments");
  sim_cmd->add_option("--study-levels", sim_opts.study_levels, "coupled dt-halving levels (0: off)");

  auto* verify_cmd = app.add_subcommand("verify", "certify the closed-form solution");
  VerifyCliOptions verify_opts;
  add_model_options(verify_cmd, model);
  add_output_options(verify_cmd, output, "text");
  verify_cmd->add_option("--br-values", verify_opts.br_values, "payout barriers to verify");
  verify_cmd->add_option("--ode-points", verify_opts.ode_points, "grid size for ODE residuals");
  verify_cmd->add_option("--ineq-points", verify_opts.inequality_points, "grid size for inequalities");

  std::vector<const char*> argv{"regdiv"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(model, output, solve_xs, out);
    if (sweep_cmd->parsed()) return cmd_sweep(model, output, sweep_opts, out);
    if (sim_cmd->parsed()) return cmd_simulate(model, output, sim_opts, out);
    if (verify_cmd->parsed()) return cmd_verify(model, output, verify_opts, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::invalid_argument& e) {  // parameter, grid and config errors
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::logic_error& e) {  // strategy/mode mismatches
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}

}  // namespace regdiv::cli
