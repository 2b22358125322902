#pragma once

// Model constants, characteristic roots and the three optimal barriers of the
// dividend/capital-injection problem with a dividend payout barrier.

#include <optional>
#include <stdexcept>
#include <string>

namespace regdiv {

// Raised when model constants violate their invariants. The message names the
// violated constraint, e.g. "k must exceed 1".
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an operation is requested in a cost regime where it is undefined.
class RegimeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when a bracketed root search cannot bracket or converge.
class RootFindingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model constants of the drifted-Brownian surplus process.
///
/// mu    drift per unit time (> 0)
/// sigma volatility per sqrt(time) (> 0)
/// alpha discount rate (> 0)
/// k     proportional capital-injection cost (> 1)
/// b_r   dividend payout barrier (>= 0)
///
/// Instances can only be obtained through create()/from_sigma2(), which
/// reject invariant violations, so every ModelParams in circulation is valid.
class ModelParams {
 public:
  static ModelParams create(double mu, double sigma, double alpha, double k,
                            double b_r = 0.0);
  static ModelParams from_sigma2(double mu, double sigma2, double alpha,
                                 double k, double b_r = 0.0);

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double sigma2() const { return sigma_ * sigma_; }
  double alpha() const { return alpha_; }
  double k() const { return k_; }
  double b_r() const { return b_r_; }

  ModelParams with_payout_barrier(double b_r) const;
  ModelParams with_k(double k) const;

  // Largest admissible payout barrier: exp(r1 * b_r) must stay finite.
  double max_payout_barrier() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  ModelParams(double mu, double sigma, double alpha, double k, double b_r)
      : mu_(mu), sigma_(sigma), alpha_(alpha), k_(k), b_r_(b_r) {}

  double mu_;
  double sigma_;
  double alpha_;
  double k_;
  double b_r_;
};

/// Roots r2 < 0 < r1 of 0.5*sigma^2*r^2 + mu*r - alpha = 0.
struct Roots {
  double r1;
  double r2;

  friend bool operator==(const Roots&, const Roots&) = default;
};

enum class Regime { LowCost, HighCost };

struct CostRegime {
  Regime regime;
  double k_critical;

  bool low_cost() const { return regime == Regime::LowCost; }
};

struct BarrierSet {
  double b_star;
  double b_double_star;
  std::optional<double> b_hat;  // LowCost only
  double b_effective_G;         // b_r v b_star
  double b_effective_H;         // b_r v b_double_star

  friend bool operator==(const BarrierSet&, const BarrierSet&) = default;
};

Roots compute_roots(const ModelParams& params);

// Relative residual of the characteristic quadratic at r.
double root_residual(const ModelParams& params, double r);

// Threshold on k separating the low- and high-cost regimes; k == k_critical
// is classified LowCost.
CostRegime cost_threshold(const Roots& roots, double k);

// h(b) = (r1 - r2) / (r1 e^{r1 b} - r2 e^{r2 b}); this is G'(0) when the
// upper barrier sits at b. Maximal at b*, where it equals k_critical.
double h_of_b(double b, const Roots& roots);

double barrier_b_star(const Roots& roots);

// Unique b > 0 with r1 e^{-r2 b} - r2 e^{-r1 b} = k (r1 - r2).
double barrier_b_double_star(const ModelParams& params, const Roots& roots);

// Root of r1 e^{r1 b} - r2 e^{r2 b} = (r1 - r2) / k on [b*, inf).
// Throws RegimeError in the high-cost regime.
double barrier_b_hat(const ModelParams& params, const Roots& roots);

// Residuals of the defining barrier equations. Used by tests and the
// verifier; exposed so callers can check a barrier they did not compute.
double b_star_residual(double b, const Roots& roots);
double b_double_star_residual(double b, const ModelParams& params,
                              const Roots& roots);
double b_hat_residual(double b, const ModelParams& params, const Roots& roots);

/// Everything the closed-form solution needs, computed once per parameter set.
struct Solution {
  ModelParams params;
  Roots roots;
  CostRegime regime;
  BarrierSet barriers;

  // Same model under a different payout barrier. Roots, regime and the free
  // barriers do not depend on b_r, so only the effective barriers change.
  Solution with_payout_barrier(double b_r) const;
};

Solution solve(const ModelParams& params);

std::string to_string(Regime regime);

}  // namespace regdiv
