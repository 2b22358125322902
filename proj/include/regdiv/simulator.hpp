#pragma once

// Monte Carlo simulation of the controlled surplus process under upper- and
// double-barrier strategies.
//
// Paths follow the Euler scheme x <- x + mu dt + sigma sqrt(dt) Z. At the end
// of each step, overflow above the barrier b is paid out as dividend and
// (double-barrier) shortfall below 0 is covered by injection; under the
// upper-barrier strategy the first step ending below 0 absorbs the path.
// Payments are discounted with the step's end time.
//
// Every path (antithetic pair) draws from its own substream, seeded from
// (seed, path index), and results are reduced in index order. Estimates are
// therefore identical for any thread count.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "regdiv/core_math.hpp"
#include "regdiv/value_functions.hpp"

namespace regdiv {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ModeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct SimConfig {
  double dt = 5e-3;
  double horizon = 420.0;
  std::uint64_t n_paths = 100000;
  std::uint64_t seed = 1;
  bool antithetic = true;
  // Payoff runs require exp(-alpha * horizon) <= truncation_tol.
  double truncation_tol = 1e-9;
  unsigned threads = 0;  // 0: hardware concurrency

  // Smallest horizon meeting the truncation tolerance for discount rate alpha.
  static double horizon_for(double alpha, double truncation_tol);
};

// Throws ConfigError on dt <= 0, horizon < dt, n_paths == 0, or (when
// `payoff` is set) a horizon too short for the truncation tolerance.
void validate(const SimConfig& cfg, double alpha, bool payoff);

struct MomentEstimate {
  int order;
  double value;
  double std_error;
};

struct SimEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_paths = 0;
  // Sample units behind stderr: antithetic pairs, or paths.
  std::uint64_t n_samples = 0;
  double ruin_fraction = 0.0;
  double mean_dividends = 0.0;   // discounted
  double mean_injections = 0.0;  // discounted, before the cost factor k
  // Dividends paid while the post-payment surplus is below b_r (must be 0).
  std::uint64_t payout_violations = 0;
  // Upper-barrier runs only: E[tau^n], n = 1..4, over absorbed paths.
  std::vector<MomentEstimate> ruin_time_moments;
  double censored_fraction = 0.0;
  double dt = 0.0;
  double horizon = 0.0;
};

// Strategy-dispatching entry point; x0 >= 0.
SimEstimate simulate(const ModelParams& params, const StrategySpec& strategy, double x0,
                     const SimConfig& cfg);

// Reflect at b, absorb below 0. An initial surplus above b is paid out at
// t = 0; x0 == 0 is ruined at t = 0.
SimEstimate simulate_upper_barrier(const ModelParams& params, double b, double x0,
                                   const SimConfig& cfg);

// Reflect at b (dividends) and 0 (injections, weighted by -k). Never ruins.
SimEstimate simulate_double_barrier(const ModelParams& params, double b, double x0,
                                    const SimConfig& cfg);

struct RuinMoments {
  std::vector<MomentEstimate> moments;  // n = 1..4
  double ruin_fraction = 0.0;
  double censored_fraction = 0.0;
  bool reliable = false;  // censored_fraction <= 1%
  std::uint64_t n_paths = 0;
};

// Moments of the ruin time under an upper-barrier strategy, from absorbed
// paths only; paths still alive at the horizon count as censored. Throws
// ModeError for a double-barrier strategy.
RuinMoments estimate_ruin_moments(const ModelParams& params, const StrategySpec& strategy,
                                  double x0, const SimConfig& cfg);

/// Coupled simulation at dt, dt/2, dt/4, ... driven by the same Brownian
/// increments; coarse levels sum consecutive fine increments.
struct LevelEstimate {
  double dt;
  double mean;
  double std_error;
};

struct DtStudy {
  std::vector<LevelEstimate> levels;  // coarse to fine
  // corrections[i] = mean(level i) - mean(level i + 1), with its own stderr.
  std::vector<LevelEstimate> corrections;
  // corrections[i] / corrections[i + 1]; sqrt(2) for an O(sqrt(dt)) bias.
  std::vector<double> shrink_factors;
  // C in bias ~ C sqrt(dt) + D dt, least-squares fit to the corrections.
  double sqrt_dt_constant = 0.0;
};

// cfg.dt is the coarsest step; `levels` >= 2.
DtStudy dt_halving_study(const ModelParams& params, const StrategySpec& strategy, double x0,
                         const SimConfig& cfg, int levels = 3);

// Least-squares C for differences
//   d_i ~ C (sqrt(dt_i) - sqrt(dt_{i+1})) + D (dt_i - dt_{i+1}),
// with D omitted for two levels.
double fit_sqrt_dt_constant(std::span<const LevelEstimate> levels);

struct TraceRow {
  double t;
  double x;
  double dD;
  double dC;
};

// One path (index `path` of the run, antithetic sign +) for debugging; rows
// are emitted for every step until ruin or the horizon.
std::vector<TraceRow> trace_path(const ModelParams& params, const StrategySpec& strategy,
                                 double x0, const SimConfig& cfg, std::uint64_t path = 0);

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);

}  // namespace regdiv
