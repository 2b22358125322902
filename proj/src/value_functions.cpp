#include "regdiv/value_functions.hpp"

#include <algorithm>
#include <cmath>

namespace regdiv {

std::string to_string(StrategyKind kind) {
  return kind == StrategyKind::UpperBarrier ? "UpperBarrier" : "DoubleBarrier";
}

BarrierValue::BarrierValue(StrategyKind kind, const Roots& roots, double k, double barrier)
    : kind_(kind), roots_(roots), barrier_(barrier) {
  if (!(std::isfinite(barrier) && barrier > 0.0)) {
    throw DomainError("barrier must be positive and finite");
  }
  const double r1 = roots.r1;
  const double r2 = roots.r2;
  const double b = barrier;
  // Common factor e^{-r1 b} applied to numerator and denominator.
  const double shrink = std::exp((r2 - r1) * b);
  if (kind == StrategyKind::UpperBarrier) {
    a1_ = 1.0;
    a2_ = -std::exp(-r1 * b);
    den_ = r1 - r2 * shrink;
  } else {
    a1_ = (1.0 - k * std::exp(r2 * b)) / r1;
    a2_ = -(std::exp(-r1 * b) - k) / r2;
    den_ = -std::expm1((r2 - r1) * b);
  }
}

BarrierValue BarrierValue::upper(const Roots& roots, double barrier) {
  return BarrierValue(StrategyKind::UpperBarrier, roots, 1.0, barrier);
}

BarrierValue BarrierValue::double_barrier(const Roots& roots, double k, double barrier) {
  return BarrierValue(StrategyKind::DoubleBarrier, roots, k, barrier);
}

CurvePoint BarrierValue::ode_branch(double x) const {
  const double r1 = roots_.r1;
  const double r2 = roots_.r2;
  const double t1 = a1_ * std::exp(r1 * (x - barrier_));
  const double t2 = a2_ * std::exp(r2 * x);
  return CurvePoint{(t1 + t2) / den_, (r1 * t1 + r2 * t2) / den_,
                    (r1 * r1 * t1 + r2 * r2 * t2) / den_, false};
}

CurvePoint BarrierValue::at(double x) const {
  if (!(x >= 0.0)) throw DomainError("surplus must be nonnegative");
  if (x < barrier_) return ode_branch(x);
  CurvePoint edge = ode_branch(barrier_);
  if (x == barrier_) {
    edge.at_kink = true;
    return edge;
  }
  return CurvePoint{x - barrier_ + edge.value, 1.0, 0.0, false};
}

BarrierValue value_G(const Solution& sol) {
  return BarrierValue::upper(sol.roots, sol.barriers.b_effective_G);
}

BarrierValue value_H(const Solution& sol) {
  return BarrierValue::double_barrier(sol.roots, sol.params.k(), sol.barriers.b_effective_H);
}

double eval_G(double x, const Solution& sol) { return value_G(sol)(x); }
double eval_G_prime(double x, const Solution& sol) { return value_G(sol).first(x); }
CurvePoint eval_G_second(double x, const Solution& sol) { return value_G(sol).at(x); }
double eval_H(double x, const Solution& sol) { return value_H(sol)(x); }
double eval_H_prime(double x, const Solution& sol) { return value_H(sol).first(x); }
CurvePoint eval_H_second(double x, const Solution& sol) { return value_H(sol).at(x); }

StrategySpec optimal_strategy(const Solution& sol) {
  const double b_r = sol.params.b_r();
  const auto& bs = sol.barriers;
  if (sol.regime.low_cost() && bs.b_hat) {
    const double b_hat = *bs.b_hat;
    const bool tie = std::abs(b_r - b_hat) <= 1e-12 * std::max(1.0, b_hat);
    if (b_r <= b_hat || tie) {
      return StrategySpec{StrategyKind::DoubleBarrier, bs.b_effective_H, 0.0, tie};
    }
  }
  return StrategySpec{StrategyKind::UpperBarrier, bs.b_effective_G, std::nullopt, false};
}

BarrierValue value_of(const StrategySpec& strategy, const Solution& sol) {
  if (strategy.kind == StrategyKind::UpperBarrier) {
    return BarrierValue::upper(sol.roots, strategy.upper);
  }
  return BarrierValue::double_barrier(sol.roots, sol.params.k(), strategy.upper);
}

double eval_V(double x, const Solution& sol) {
  return std::max(eval_H(x, sol), eval_G(x, sol));
}

namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw GridError("grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
      throw GridError("grid values must be finite and nonnegative");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw GridError("grid must be sorted in strictly ascending order");
    }
  }
}

}  // namespace

ValueCurve sweep_surplus(const Solution& sol, std::span<const double> xs) {
  check_grid(xs);
  const BarrierValue g = value_G(sol);
  const BarrierValue h = value_H(sol);
  ValueCurve curve{SweepMode::SurplusGrid, {xs.begin(), xs.end()}, {}, {}, {}, sol.params.b_r()};
  for (double x : xs) {
    curve.values_G.push_back(g(x));
    curve.values_H.push_back(h(x));
    curve.values_V.push_back(std::max(curve.values_G.back(), curve.values_H.back()));
  }
  return curve;
}

ValueCurve sweep_payout_barrier(const Solution& sol, double x,
                                std::span<const double> payout_barriers) {
  check_grid(payout_barriers);
  if (!(x >= 0.0)) throw DomainError("surplus must be nonnegative");
  ValueCurve curve{SweepMode::PayoutBarrierGrid,
                   {payout_barriers.begin(), payout_barriers.end()},
                   {}, {}, {}, x};
  for (double b_r : payout_barriers) {
    const Solution at = sol.with_payout_barrier(b_r);
    curve.values_G.push_back(eval_G(x, at));
    curve.values_H.push_back(eval_H(x, at));
    curve.values_V.push_back(std::max(curve.values_G.back(), curve.values_H.back()));
  }
  return curve;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

}  // namespace regdiv
