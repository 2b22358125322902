#pragma once

// Numerical certification of the closed-form solution: ODE residuals,
// boundary and smooth-fit conditions, the verification inequalities and the
// convexity structure of the value functions.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regdiv/core_math.hpp"
#include "regdiv/value_functions.hpp"

namespace regdiv {

enum class Which { G, H };

std::string to_string(Which which);

struct VerificationTolerances {
  double ode_residual = 1e-8;
  double boundary = 1e-9;
  // Weak inequalities may be violated by at most this much (float noise).
  double inequality_slack = 1e-10;
};

struct Violation {
  std::string condition;
  double x;
  double magnitude;
};

struct VerificationReport {
  double max_ode_residual = 0.0;
  std::map<std::string, double> boundary_errors;
  std::vector<Violation> inequality_violations;
  bool passed = true;

  void merge(const VerificationReport& other);
  // Recomputes `passed` from the collected numbers.
  void evaluate(const VerificationTolerances& tol);
};

/// A value function proposed as the solution of one restricted problem.
///
/// `free_barrier` is the barrier at which smooth fit is claimed (b* for G,
/// b** for H). When the payout barrier does not exceed it, the value
/// function's barrier must equal it and the second derivative must vanish
/// there; otherwise the barrier is b_r and the curvature there is positive.
struct Candidate {
  Which which;
  BarrierValue value;
  double free_barrier;
  double payout_barrier;

  bool at_free_barrier() const { return payout_barrier <= free_barrier; }
};

Candidate candidate_G(const Solution& sol);
Candidate candidate_H(const Solution& sol);
// The candidate for the strategy selected by optimal_strategy().
Candidate optimal_candidate(const Solution& sol);

// |alpha f - mu f' - 0.5 sigma^2 f''|.
double ode_residual(const ModelParams& params, const CurvePoint& p);

// Max ODE residual of an arbitrary function over a grid.
double max_ode_residual(const ModelParams& params,
                        const std::function<CurvePoint(double)>& f,
                        std::span<const double> grid);

// n points i*b/n, i = 0..n-1: covers [0, b) and stops one step short of b.
std::vector<double> ode_grid(double barrier, std::size_t n);

// ODE residual on grid points below the barrier and the affine-branch error
// on points above it. Points equal to the barrier are skipped. Throws
// GridError for empty, unsorted or negative grids.
VerificationReport ode_residual_sweep(const Candidate& cand, const ModelParams& params,
                                      std::span<const double> grid);

// f(0) = 0 (G) or f'(0) = k (H); f'(b) = 1; f''(b-) = 0 at a free barrier,
// f''(b-) > 0 when the payout barrier binds.
VerificationReport boundary_conditions(const Candidate& cand, const ModelParams& params,
                                       const VerificationTolerances& tol = {});

// For the value function g of the selected strategy with barrier b:
//  (a) mu - alpha g(x) <= 0 for x > b
//  (b) 1 <= g'(x) <= k at a free barrier; g'(x) <= k and g' = 1 above b_r
//      when the payout barrier binds
//  (c) g(x) >= 0
VerificationReport theorem_inequalities(const Candidate& cand, const ModelParams& params,
                                        std::span<const double> grid,
                                        const VerificationTolerances& tol = {});
VerificationReport theorem_inequalities(const Solution& sol, std::span<const double> grid,
                                        const VerificationTolerances& tol = {});

// [0, b + span] with n points; above b the functions are affine so check (a)
// cannot first fail further out.
std::vector<double> inequality_grid(double barrier, std::size_t n = 10001, double span = 10.0);

struct ConvexityResult {
  VerificationReport report;
  int sign_changes = 0;
  std::optional<double> switch_point;  // interpolated zero of g''
};

// Sign structure of g'' on grid points below the barrier: strictly negative
// at a free barrier, otherwise negative then positive with one switch.
ConvexityResult convexity_switch_check(const Candidate& cand, std::span<const double> grid,
                                       const VerificationTolerances& tol = {});

struct VerifyOptions {
  std::size_t ode_points = 1000;
  std::size_t inequality_points = 10001;
  double inequality_span = 10.0;
  VerificationTolerances tol;
};

// Runs every check for G, H and the optimal strategy.
VerificationReport verify_solution(const Solution& sol, const VerifyOptions& opts = {});

}  // namespace regdiv
