#pragma once

// Closed-form value functions of barrier strategies, the optimal value
// V = H v G and the optimal strategy selection.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "regdiv/core_math.hpp"

namespace regdiv {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class StrategyKind { UpperBarrier, DoubleBarrier };

std::string to_string(StrategyKind kind);

/// Value, slope and curvature at one surplus level.
///
/// At x == barrier the second derivative is two-valued (ODE branch on the
/// left, 0 on the affine branch); `second` then holds the left limit and
/// `at_kink` is set.
struct CurvePoint {
  double value;
  double first;
  double second;
  bool at_kink;
};

/// Expected discounted payoff of a barrier strategy as a function of the
/// initial surplus x.
///
///  UpperBarrier:  reflect at b, absorb at 0
///     f(x) = (e^{r1 x} - e^{r2 x}) / (r1 e^{r1 b} - r2 e^{r2 b})        x <= b
///  DoubleBarrier: reflect at b and 0, injections cost k per unit
///     f(x) = ((1 - k e^{r2 b}) / r1 e^{r1 x} - (1 - k e^{r1 b}) / r2 e^{r2 x})
///            / (e^{r1 b} - e^{r2 b})                                     x <= b
///  and f(x) = x - b + f(b) above the barrier for both kinds.
///
/// Both formulas are evaluated after multiplying numerator and denominator
/// by e^{-r1 b}, so every exponent is nonpositive on [0, b] and large
/// barriers do not overflow.
class BarrierValue {
 public:
  static BarrierValue upper(const Roots& roots, double barrier);
  static BarrierValue double_barrier(const Roots& roots, double k, double barrier);

  StrategyKind kind() const { return kind_; }
  double barrier() const { return barrier_; }

  // Throws DomainError for x < 0.
  CurvePoint at(double x) const;
  double operator()(double x) const { return at(x).value; }
  double first(double x) const { return at(x).first; }
  double second(double x) const { return at(x).second; }

 private:
  BarrierValue(StrategyKind kind, const Roots& roots, double k, double barrier);
  CurvePoint ode_branch(double x) const;

  StrategyKind kind_;
  Roots roots_;
  double barrier_;
  // f(x) = (a1 e^{r1 (x - b)} + a2 e^{r2 x}) / den on [0, b].
  double a1_;
  double a2_;
  double den_;
};

// G: optimal without capital injection (barrier b_r v b*).
BarrierValue value_G(const Solution& sol);
// H: optimal without bankruptcy (barriers 0 and b_r v b**).
BarrierValue value_H(const Solution& sol);

double eval_G(double x, const Solution& sol);
double eval_G_prime(double x, const Solution& sol);
CurvePoint eval_G_second(double x, const Solution& sol);
double eval_H(double x, const Solution& sol);
double eval_H_prime(double x, const Solution& sol);
CurvePoint eval_H_second(double x, const Solution& sol);

struct StrategySpec {
  StrategyKind kind;
  double upper;
  std::optional<double> lower;  // 0 for DoubleBarrier
  // Set when b_r == b_hat: both strategies attain the optimal value.
  bool both_optimal = false;

  friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

StrategySpec optimal_strategy(const Solution& sol);

// The value function realized by a strategy under the solution's model.
BarrierValue value_of(const StrategySpec& strategy, const Solution& sol);

// max(H, G); throws DomainError for x < 0.
double eval_V(double x, const Solution& sol);

enum class SweepMode { SurplusGrid, PayoutBarrierGrid };

struct ValueCurve {
  SweepMode mode;
  std::vector<double> abscissae;
  std::vector<double> values_G;
  std::vector<double> values_H;
  std::vector<double> values_V;
  // Payout barrier of a surplus sweep; the fixed surplus of a barrier sweep.
  double fixed;
};

// G, H, V over a surplus grid at the solution's payout barrier.
ValueCurve sweep_surplus(const Solution& sol, std::span<const double> xs);
// G, H, V at fixed surplus x over a grid of payout barriers.
ValueCurve sweep_payout_barrier(const Solution& sol, double x,
                                std::span<const double> payout_barriers);

// n evenly spaced points on [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace regdiv
