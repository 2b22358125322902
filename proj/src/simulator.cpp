#include "regdiv/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include <boost/random/normal_distribution.hpp>

namespace regdiv {
namespace {

using Engine = std::mt19937_64;
using Normal = boost::random::normal_distribution<double>;

Engine substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Engine(seq);
}

// Neumaier-compensated running sum; reductions happen in index order so the
// result does not depend on how samples were spread across threads.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanStd {
  double mean;
  double std_error;
};

MeanStd mean_and_stderr(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  CompensatedSum s;
  for (double x : xs) s.add(x);
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  if (xs.size() < 2) return {mean, 0.0};
  CompensatedSum sq;
  for (double x : xs) sq.add((x - mean) * (x - mean));
  return {mean, std::sqrt(sq.value() / (n - 1.0) / n)};
}

std::uint64_t step_count(const SimConfig& cfg) {
  return static_cast<std::uint64_t>(std::ceil(cfg.horizon / cfg.dt - 1e-9));
}

unsigned thread_count(const SimConfig& cfg, std::uint64_t samples) {
  unsigned n = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(n, std::max<std::uint64_t>(samples, 1)));
}

// Runs body(i) for i in [0, n) on up to `threads` threads, in contiguous chunks.
template <typename Body>
void parallel_for(std::uint64_t n, unsigned threads, Body&& body) {
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::uint64_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t lo = t * chunk;
    const std::uint64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::uint64_t i = lo; i < hi; ++i) body(i);
    });
  }
}

struct Controls {
  double b;
  double b_r;
  double k;
  bool absorb;  // upper-barrier strategy
};

// Struct-of-arrays lane storage so the per-step projection vectorizes.
struct Lanes {
  std::vector<double> x;
  std::vector<double> dividends;
  std::vector<double> injections;
  std::vector<double> ruin_time;  // NaN while alive
  std::vector<double> alive;      // 1 or 0, used as a multiplier
  std::vector<std::uint64_t> violations;
  std::size_t live = 0;

  Lanes(std::size_t n, const Controls& c, double x0)
      : x(n, x0),
        dividends(n, 0.0),
        injections(n, 0.0),
        ruin_time(n, std::numeric_limits<double>::quiet_NaN()),
        alive(n, 1.0),
        violations(n, 0),
        live(n) {
    if (x0 > c.b) {
      std::fill(dividends.begin(), dividends.end(), x0 - c.b);  // lump payment at t = 0
      std::fill(x.begin(), x.end(), c.b);
      if (c.b < c.b_r) std::fill(violations.begin(), violations.end(), 1);
    }
    if (c.absorb && x0 <= 0.0) {
      std::fill(alive.begin(), alive.end(), 0.0);
      std::fill(ruin_time.begin(), ruin_time.end(), 0.0);
      live = 0;
    }
  }

  // Ruined lanes ignore their increments, so their draws can be skipped.
  bool any_alive(std::size_t first, std::size_t count) const {
    for (std::size_t i = first; i < first + count; ++i) {
      if (alive[i] > 0.0) return true;
    }
    return false;
  }

  double payoff(std::size_t i, const Controls& c) const {
    return dividends[i] - c.k * injections[i];
  }
};

// Adds inc[i] to lanes [first, first + count) and applies the end-of-step
// controls at time t with discount factor `discount`.
template <bool kAbsorb, bool kCountViolations>
void advance_impl(Lanes& L, std::size_t first, std::size_t count, const double* inc,
                  const Controls& c, double discount, double t) {
  double* x = L.x.data() + first;
  double* div = L.dividends.data() + first;
  double* inj = L.injections.data() + first;
  double* alive = L.alive.data() + first;
  std::uint64_t* viol = L.violations.data() + first;
  const double b = c.b;
  std::size_t dying = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double xn = kAbsorb ? x[i] + alive[i] * inc[i] : x[i] + inc[i];
    const double over = std::max(xn - b, 0.0);
    div[i] += discount * over;
    if constexpr (kCountViolations) viol[i] += over > 0.0 ? 1 : 0;
    if constexpr (kAbsorb) {
      x[i] = std::min(xn, b);
      dying += (alive[i] > 0.0 && xn < 0.0) ? 1 : 0;
    } else {
      inj[i] += discount * std::max(-xn, 0.0);
      x[i] = std::min(std::max(xn, 0.0), b);
    }
  }
  if (kAbsorb && dying > 0) {
    for (std::size_t i = 0; i < count; ++i) {
      if (alive[i] > 0.0 && x[i] < 0.0) {
        alive[i] = 0.0;
        L.ruin_time[first + i] = t;
      }
    }
    L.live -= dying;
  }
}

void advance(Lanes& L, std::size_t first, std::size_t count, const double* inc,
             const Controls& c, double discount, double t) {
  const bool count_violations = c.b < c.b_r;
  if (c.absorb) {
    count_violations ? advance_impl<true, true>(L, first, count, inc, c, discount, t)
                     : advance_impl<true, false>(L, first, count, inc, c, discount, t);
  } else {
    count_violations ? advance_impl<false, true>(L, first, count, inc, c, discount, t)
                     : advance_impl<false, false>(L, first, count, inc, c, discount, t);
  }
}

Controls controls_for(const ModelParams& params, StrategyKind kind, double b) {
  if (!(std::isfinite(b) && b > 0.0)) throw ConfigError("barrier must be positive and finite");
  return Controls{b, params.b_r(), params.k(), kind == StrategyKind::UpperBarrier};
}

void check_x0(double x0) {
  if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("initial surplus must be nonnegative");
}

// Per-lane outputs of a plain (single-level) run.
struct RunOutput {
  std::vector<double> sample_payoff;  // per sample (pair average when antithetic)
  std::vector<double> ruin_times;     // per lane, NaN when alive at the horizon
  std::vector<std::uint8_t> ruined;
  CompensatedSum dividends;
  CompensatedSum injections;
  std::uint64_t violations = 0;
  std::uint64_t lanes = 0;
};

// Samples advance in lockstep blocks so the per-lane dependency chains
// overlap; every sample still owns its substream.
constexpr std::uint64_t kBlock = 8;

RunOutput run(const ModelParams& params, StrategyKind kind, double b, double x0,
              const SimConfig& cfg) {
  const Controls c = controls_for(params, kind, b);
  const std::uint64_t width = cfg.antithetic ? 2 : 1;
  const std::uint64_t samples = cfg.n_paths / width;
  const std::uint64_t steps = step_count(cfg);
  const double drift = params.mu() * cfg.dt;
  const double vol = params.sigma() * std::sqrt(cfg.dt);
  const double step_discount = std::exp(-params.alpha() * cfg.dt);

  RunOutput out;
  out.lanes = samples * width;
  out.sample_payoff.assign(samples, 0.0);
  out.ruin_times.assign(out.lanes, std::numeric_limits<double>::quiet_NaN());
  out.ruined.assign(out.lanes, 0);
  std::vector<double> div(out.lanes), inj(out.lanes);
  std::vector<std::uint64_t> viol(out.lanes);

  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  parallel_for(blocks, thread_count(cfg, blocks), [&](std::uint64_t blk) {
    const std::uint64_t first = blk * kBlock;
    const std::uint64_t n = std::min(kBlock, samples - first);
    const std::size_t nl = n * width;
    Normal normal;
    Engine rng[kBlock];
    for (std::uint64_t j = 0; j < n; ++j) rng[j] = substream(cfg.seed, first + j);
    Lanes lanes(nl, c, x0);
    double inc[2 * kBlock];
    double discount = 1.0;
    for (std::uint64_t s = 1; s <= steps && lanes.live > 0; ++s) {
      for (std::uint64_t j = 0; j < n; ++j) {
        if (!lanes.any_alive(j * width, width)) continue;
        const double z = vol * normal(rng[j]);
        inc[j * width] = drift + z;
        if (width == 2) inc[j * width + 1] = drift - z;
      }
      discount *= step_discount;
      advance(lanes, 0, nl, inc, c, discount, static_cast<double>(s) * cfg.dt);
    }
    for (std::uint64_t j = 0; j < n; ++j) {
      double total = 0.0;
      for (std::uint64_t w = 0; w < width; ++w) {
        const std::size_t l = j * width + w;
        const std::uint64_t idx = (first + j) * width + w;
        total += lanes.payoff(l, c);
        out.ruin_times[idx] = lanes.ruin_time[l];
        out.ruined[idx] = lanes.alive[l] > 0.0 ? 0 : 1;
        div[idx] = lanes.dividends[l];
        inj[idx] = lanes.injections[l];
        viol[idx] = lanes.violations[l];
      }
      out.sample_payoff[first + j] = total / static_cast<double>(width);
    }
  });

  for (std::uint64_t l = 0; l < out.lanes; ++l) {
    out.dividends.add(div[l]);
    out.injections.add(inj[l]);
    out.violations += viol[l];
  }
  return out;
}

std::vector<MomentEstimate> ruin_moments(std::span<const double> ruin_times,
                                         std::span<const std::uint8_t> ruined) {
  std::vector<MomentEstimate> out;
  for (int n = 1; n <= 4; ++n) {
    std::vector<double> powers;
    for (std::size_t i = 0; i < ruin_times.size(); ++i) {
      if (ruined[i]) powers.push_back(std::pow(ruin_times[i], n));
    }
    const MeanStd m = mean_and_stderr(powers);
    out.push_back({n, m.mean, m.std_error});
  }
  return out;
}

void check_antithetic(const SimConfig& cfg) {
  if (cfg.antithetic && cfg.n_paths % 2 != 0) {
    throw ConfigError("n_paths must be even with antithetic sampling");
  }
}

}  // namespace

double SimConfig::horizon_for(double alpha, double truncation_tol) {
  double h = -std::log(truncation_tol) / alpha;
  while (std::exp(-alpha * h) > truncation_tol) h = std::nextafter(h, HUGE_VAL);
  return h;
}

void validate(const SimConfig& cfg, double alpha, bool payoff) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("dt must be positive");
  if (!(cfg.horizon >= cfg.dt) || !std::isfinite(cfg.horizon)) {
    throw ConfigError("horizon must be finite and at least dt");
  }
  if (cfg.n_paths == 0) throw ConfigError("n_paths must be positive");
  if (!(cfg.truncation_tol > 0.0 && cfg.truncation_tol < 1.0)) {
    throw ConfigError("truncation_tol must lie in (0, 1)");
  }
  if (payoff && std::exp(-alpha * cfg.horizon) > cfg.truncation_tol) {
    throw ConfigError("horizon too short: exp(-alpha * horizon) exceeds truncation_tol");
  }
  check_antithetic(cfg);
}

SimEstimate simulate(const ModelParams& params, const StrategySpec& strategy, double x0,
                     const SimConfig& cfg) {
  return strategy.kind == StrategyKind::UpperBarrier
             ? simulate_upper_barrier(params, strategy.upper, x0, cfg)
             : simulate_double_barrier(params, strategy.upper, x0, cfg);
}

namespace {

SimEstimate estimate(const ModelParams& params, StrategyKind kind, double b, double x0,
                     const SimConfig& cfg) {
  validate(cfg, params.alpha(), true);
  check_x0(x0);
  const RunOutput out = run(params, kind, b, x0, cfg);
  const MeanStd m = mean_and_stderr(out.sample_payoff);
  SimEstimate est;
  est.mean = m.mean;
  est.std_error = m.std_error;
  est.n_paths = out.lanes;
  est.n_samples = out.sample_payoff.size();
  const double lanes = static_cast<double>(out.lanes);
  std::uint64_t ruined = 0;
  for (auto r : out.ruined) ruined += r;
  est.ruin_fraction = static_cast<double>(ruined) / lanes;
  est.mean_dividends = out.dividends.value() / lanes;
  est.mean_injections = out.injections.value() / lanes;
  est.payout_violations = out.violations;
  if (kind == StrategyKind::UpperBarrier) {
    est.ruin_time_moments = ruin_moments(out.ruin_times, out.ruined);
    est.censored_fraction = 1.0 - est.ruin_fraction;
  }
  est.dt = cfg.dt;
  est.horizon = cfg.horizon;
  return est;
}

}  // namespace

SimEstimate simulate_upper_barrier(const ModelParams& params, double b, double x0,
                                   const SimConfig& cfg) {
  return estimate(params, StrategyKind::UpperBarrier, b, x0, cfg);
}

SimEstimate simulate_double_barrier(const ModelParams& params, double b, double x0,
                                    const SimConfig& cfg) {
  return estimate(params, StrategyKind::DoubleBarrier, b, x0, cfg);
}

RuinMoments estimate_ruin_moments(const ModelParams& params, const StrategySpec& strategy,
                                  double x0, const SimConfig& cfg) {
  if (strategy.kind != StrategyKind::UpperBarrier) {
    throw ModeError("ruin-time moments need an upper-barrier strategy; double-barrier paths never ruin");
  }
  SimConfig plain = cfg;
  plain.antithetic = false;
  validate(plain, params.alpha(), false);
  check_x0(x0);
  const RunOutput out = run(params, StrategyKind::UpperBarrier, strategy.upper, x0, plain);
  RuinMoments rm;
  rm.n_paths = out.lanes;
  std::uint64_t ruined = 0;
  for (auto r : out.ruined) ruined += r;
  rm.ruin_fraction = static_cast<double>(ruined) / static_cast<double>(out.lanes);
  rm.censored_fraction = 1.0 - rm.ruin_fraction;
  rm.reliable = rm.censored_fraction <= 0.01;
  rm.moments = ruin_moments(out.ruin_times, out.ruined);
  return rm;
}

DtStudy dt_halving_study(const ModelParams& params, const StrategySpec& strategy, double x0,
                         const SimConfig& cfg, int levels) {
  if (levels < 2 || levels > 16) throw ConfigError("dt study needs between 2 and 16 levels");
  validate(cfg, params.alpha(), true);
  check_x0(x0);
  const Controls c = controls_for(params, strategy.kind, strategy.upper);
  const std::size_t width = cfg.antithetic ? 2 : 1;
  const std::uint64_t samples = cfg.n_paths / width;
  const std::uint64_t fine_per_coarse = std::uint64_t{1} << (levels - 1);
  const double fine_dt = cfg.dt / static_cast<double>(fine_per_coarse);
  // Whole coarse steps, so every level ends at the same time.
  const std::uint64_t fine_steps = step_count(cfg) * fine_per_coarse;
  const double fine_drift = params.mu() * fine_dt;
  const double fine_vol = params.sigma() * std::sqrt(fine_dt);

  const auto L = static_cast<std::size_t>(levels);
  std::vector<std::uint64_t> stride(L);
  std::vector<double> level_discount(L);
  for (std::size_t l = 0; l < L; ++l) {
    stride[l] = fine_per_coarse >> l;
    level_discount[l] = std::exp(-params.alpha() * fine_dt * static_cast<double>(stride[l]));
  }

  // payoffs[l * samples + i]
  std::vector<double> payoffs(L * samples, 0.0);
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  parallel_for(blocks, thread_count(cfg, blocks), [&](std::uint64_t blk) {
    const std::uint64_t first = blk * kBlock;
    const std::uint64_t n = std::min(kBlock, samples - first);
    const std::size_t m = n * width;  // lanes per level
    Normal normal;
    Engine rng[kBlock];
    for (std::uint64_t j = 0; j < n; ++j) rng[j] = substream(cfg.seed, first + j);
    // lane index l * m + j * width + w
    Lanes lanes(L * m, c, x0);
    std::vector<double> acc(L * m, 0.0);
    std::vector<double> discount(L, 1.0);
    double inc[2 * kBlock];
    for (std::uint64_t s = 1; s <= fine_steps && lanes.live > 0; ++s) {
      for (std::uint64_t j = 0; j < n; ++j) {
        bool needed = false;
        for (std::size_t l = 0; l < L && !needed; ++l) needed = lanes.any_alive(l * m + j * width, width);
        if (!needed) continue;
        const double z = fine_vol * normal(rng[j]);
        inc[j * width] = fine_drift + z;
        if (width == 2) inc[j * width + 1] = fine_drift - z;
      }
      const double t = static_cast<double>(s) * fine_dt;
      for (std::size_t l = 0; l < L; ++l) {
        double* a = acc.data() + l * m;
        for (std::size_t i = 0; i < m; ++i) a[i] += inc[i];
        if (s % stride[l] == 0) {
          discount[l] *= level_discount[l];
          advance(lanes, l * m, m, a, c, discount[l], t);
          std::fill(a, a + m, 0.0);
        }
      }
    }
    for (std::uint64_t j = 0; j < n; ++j) {
      for (std::size_t l = 0; l < L; ++l) {
        double total = 0.0;
        for (std::size_t w = 0; w < width; ++w) total += lanes.payoff(l * m + j * width + w, c);
        payoffs[l * samples + first + j] = total / static_cast<double>(width);
      }
    }
  });

  DtStudy study;
  for (std::size_t l = 0; l < L; ++l) {
    const MeanStd m = mean_and_stderr(std::span<const double>(payoffs).subspan(l * samples, samples));
    study.levels.push_back({fine_dt * static_cast<double>(stride[l]), m.mean, m.std_error});
  }
  std::vector<double> diff(samples);
  for (std::size_t l = 0; l + 1 < L; ++l) {
    for (std::uint64_t i = 0; i < samples; ++i) {
      diff[i] = payoffs[l * samples + i] - payoffs[(l + 1) * samples + i];
    }
    const MeanStd m = mean_and_stderr(diff);
    study.corrections.push_back({study.levels[l].dt, m.mean, m.std_error});
  }
  for (std::size_t l = 0; l + 1 < study.corrections.size(); ++l) {
    study.shrink_factors.push_back(study.corrections[l].mean / study.corrections[l + 1].mean);
  }
  study.sqrt_dt_constant = fit_sqrt_dt_constant(study.levels);
  return study;
}

double fit_sqrt_dt_constant(std::span<const LevelEstimate> levels) {
  // Normal equations for d_i = C u_i + D v_i, u_i, v_i the level differences
  // of sqrt(dt) and dt. D is dropped when only one difference is available.
  double uu = 0.0, uv = 0.0, vv = 0.0, ud = 0.0, vd = 0.0;
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < levels.size(); ++l, ++n) {
    const double u = std::sqrt(levels[l].dt) - std::sqrt(levels[l + 1].dt);
    const double v = levels[l].dt - levels[l + 1].dt;
    const double d = levels[l].mean - levels[l + 1].mean;
    uu += u * u;
    uv += u * v;
    vv += v * v;
    ud += u * d;
    vd += v * d;
  }
  if (n == 0 || uu == 0.0) return 0.0;
  const double det = uu * vv - uv * uv;
  if (n < 2 || !(std::abs(det) > 1e-12 * uu * vv)) return ud / uu;
  return (ud * vv - vd * uv) / det;
}

std::vector<TraceRow> trace_path(const ModelParams& params, const StrategySpec& strategy,
                                 double x0, const SimConfig& cfg, std::uint64_t path) {
  validate(cfg, params.alpha(), false);
  check_x0(x0);
  const Controls c = controls_for(params, strategy.kind, strategy.upper);
  const std::uint64_t steps = step_count(cfg);
  const double drift = params.mu() * cfg.dt;
  const double vol = params.sigma() * std::sqrt(cfg.dt);
  const double step_discount = std::exp(-params.alpha() * cfg.dt);

  Engine rng = substream(cfg.seed, path);
  Normal normal;
  Lanes lane(1, c, x0);
  std::vector<TraceRow> rows;
  rows.push_back({0.0, lane.x[0], lane.dividends[0], 0.0});
  double discount = 1.0;
  for (std::uint64_t s = 1; s <= steps && lane.live > 0; ++s) {
    const double inc = drift + vol * normal(rng);
    discount *= step_discount;
    const double t = static_cast<double>(s) * cfg.dt;
    const double pre = lane.x[0] + inc;
    advance(lane, 0, 1, &inc, c, discount, t);
    const double paid = std::max(pre - c.b, 0.0);
    const double injected = c.absorb ? 0.0 : std::max(-pre, 0.0);
    rows.push_back({t, lane.x[0], paid, injected});
  }
  return rows;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
  out << "t,x,dD,dC\n";
  for (const TraceRow& r : rows) {
    out << r.t << ',' << r.x << ',' << r.dD << ',' << r.dC << '\n';
  }
}

}  // namespace regdiv
