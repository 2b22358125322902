#include "regdiv/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "regdiv/root_finding.hpp"

namespace regdiv {
namespace {

// exp(r1 * b_r) must stay finite; exp(r2 * b_r) only underflows towards 0,
// which the rescaled value-function formulas tolerate.
constexpr double kMaxExponent = 700.0;

double positive_root(double mu, double sigma2, double alpha) {
  const double m = mu / sigma2;
  const double disc = std::sqrt(m * m + 2.0 * alpha / sigma2);
  // r1 = -m + disc, written via r1 * r2 = -2 alpha / sigma^2 to avoid
  // cancellation when the drift term dominates.
  return (2.0 * alpha / sigma2) / (m + disc);
}

void require(bool ok, const char* message) {
  if (!ok) throw ParameterError(message);
}

}  // namespace

ModelParams ModelParams::create(double mu, double sigma, double alpha, double k,
                                double b_r) {
  require(std::isfinite(mu) && mu > 0.0, "mu must be positive");
  require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive");
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
  require(std::isfinite(k) && k > 1.0, "k must exceed 1");
  require(std::isfinite(b_r) && b_r >= 0.0, "b_r must be nonnegative");
  ModelParams p(mu, sigma, alpha, k, b_r);
  if (b_r > p.max_payout_barrier()) {
    throw ParameterError("b_r must not exceed the overflow guard 700/r1 = " +
                         std::to_string(p.max_payout_barrier()));
  }
  return p;
}

ModelParams ModelParams::from_sigma2(double mu, double sigma2, double alpha,
                                     double k, double b_r) {
  require(std::isfinite(sigma2) && sigma2 > 0.0, "sigma must be positive");
  return create(mu, std::sqrt(sigma2), alpha, k, b_r);
}

ModelParams ModelParams::with_payout_barrier(double b_r) const {
  return create(mu_, sigma_, alpha_, k_, b_r);
}

ModelParams ModelParams::with_k(double k) const {
  return create(mu_, sigma_, alpha_, k, b_r_);
}

double ModelParams::max_payout_barrier() const {
  return kMaxExponent / positive_root(mu_, sigma2(), alpha_);
}

Roots compute_roots(const ModelParams& params) {
  const double s2 = params.sigma2();
  const double m = params.mu() / s2;
  const double disc = std::sqrt(m * m + 2.0 * params.alpha() / s2);
  return Roots{positive_root(params.mu(), s2, params.alpha()), -m - disc};
}

double root_residual(const ModelParams& params, double r) {
  const double quad = 0.5 * params.sigma2() * r * r;
  const double lin = params.mu() * r;
  const double scale = quad + std::abs(lin) + params.alpha();
  return std::abs(quad + lin - params.alpha()) / scale;
}

CostRegime cost_threshold(const Roots& roots, double k) {
  const double r1 = roots.r1;
  const double r2 = roots.r2;
  const double ratio = (r2 * r2) / (r1 * r1);
  const double spread = r1 - r2;
  const double k_critical =
      spread / (r1 * std::pow(ratio, r1 / spread) - r2 * std::pow(ratio, r2 / spread));
  return CostRegime{k <= k_critical ? Regime::LowCost : Regime::HighCost, k_critical};
}

double h_of_b(double b, const Roots& roots) {
  const double r1 = roots.r1;
  const double r2 = roots.r2;
  return (r1 - r2) / (r1 * std::exp(r1 * b) - r2 * std::exp(r2 * b));
}

double barrier_b_star(const Roots& roots) {
  return std::log((roots.r2 * roots.r2) / (roots.r1 * roots.r1)) / (roots.r1 - roots.r2);
}

double b_star_residual(double b, const Roots& roots) {
  const double r1 = roots.r1;
  const double r2 = roots.r2;
  return r1 * r1 * std::exp(r1 * b) - r2 * r2 * std::exp(r2 * b);
}

double b_double_star_residual(double b, const ModelParams& params, const Roots& roots) {
  const double r1 = roots.r1;
  const double r2 = roots.r2;
  return r1 * std::exp(-r2 * b) - r2 * std::exp(-r1 * b) - params.k() * (r1 - r2);
}

double b_hat_residual(double b, const ModelParams& params, const Roots& roots) {
  const double r1 = roots.r1;
  const double r2 = roots.r2;
  return r1 * std::exp(r1 * b) - r2 * std::exp(r2 * b) - (r1 - r2) / params.k();
}

double barrier_b_double_star(const ModelParams& params, const Roots& roots) {
  // Left side is strictly increasing in b and equals r1 - r2 < k (r1 - r2) at 0.
  return increasing_root(
      [&](double b) { return b_double_star_residual(b, params, roots); }, 0.0);
}

double barrier_b_hat(const ModelParams& params, const Roots& roots) {
  const CostRegime regime = cost_threshold(roots, params.k());
  if (!regime.low_cost()) {
    throw RegimeError("b_hat is only defined in the low-cost regime (k <= k_critical)");
  }
  // The left side is decreasing on [0, b*] and increasing beyond, so start at
  // b* where the low-cost condition makes the residual nonpositive.
  return increasing_root([&](double b) { return b_hat_residual(b, params, roots); },
                         barrier_b_star(roots));
}

Solution Solution::with_payout_barrier(double b_r) const {
  Solution out = *this;
  out.params = params.with_payout_barrier(b_r);
  out.barriers.b_effective_G = std::max(b_r, barriers.b_star);
  out.barriers.b_effective_H = std::max(b_r, barriers.b_double_star);
  return out;
}

Solution solve(const ModelParams& params) {
  const Roots roots = compute_roots(params);
  const CostRegime regime = cost_threshold(roots, params.k());
  BarrierSet barriers{};
  barriers.b_star = barrier_b_star(roots);
  barriers.b_double_star = barrier_b_double_star(params, roots);
  if (regime.low_cost()) barriers.b_hat = barrier_b_hat(params, roots);
  barriers.b_effective_G = std::max(params.b_r(), barriers.b_star);
  barriers.b_effective_H = std::max(params.b_r(), barriers.b_double_star);
  return Solution{params, roots, regime, barriers};
}

std::string to_string(Regime regime) {
  return regime == Regime::LowCost ? "LowCost" : "HighCost";
}

}  // namespace regdiv
