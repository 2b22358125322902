#include "regdiv/verification.hpp"

#include <algorithm>
#include <cmath>

namespace regdiv {
namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw GridError("verification grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
      throw GridError("verification grid values must be finite and nonnegative");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw GridError("verification grid must be strictly ascending");
    }
  }
}

std::string name(const Candidate& c, const char* what) {
  return to_string(c.which) + "." + what;
}

void note_error(VerificationReport& r, const std::string& key, double err) {
  auto [it, inserted] = r.boundary_errors.emplace(key, err);
  if (!inserted) it->second = std::max(it->second, err);
}

}  // namespace

std::string to_string(Which which) { return which == Which::G ? "G" : "H"; }

void VerificationReport::merge(const VerificationReport& other) {
  max_ode_residual = std::max(max_ode_residual, other.max_ode_residual);
  for (const auto& [key, err] : other.boundary_errors) note_error(*this, key, err);
  inequality_violations.insert(inequality_violations.end(),
                               other.inequality_violations.begin(),
                               other.inequality_violations.end());
  passed = passed && other.passed;
}

void VerificationReport::evaluate(const VerificationTolerances& tol) {
  passed = max_ode_residual < tol.ode_residual && inequality_violations.empty();
  for (const auto& [key, err] : boundary_errors) {
    if (!(err < tol.boundary)) passed = false;
  }
}

Candidate candidate_G(const Solution& sol) {
  return Candidate{Which::G, value_G(sol), sol.barriers.b_star, sol.params.b_r()};
}

Candidate candidate_H(const Solution& sol) {
  return Candidate{Which::H, value_H(sol), sol.barriers.b_double_star, sol.params.b_r()};
}

Candidate optimal_candidate(const Solution& sol) {
  return optimal_strategy(sol).kind == StrategyKind::DoubleBarrier ? candidate_H(sol)
                                                                  : candidate_G(sol);
}

double ode_residual(const ModelParams& params, const CurvePoint& p) {
  return std::abs(params.alpha() * p.value - params.mu() * p.first -
                  0.5 * params.sigma2() * p.second);
}

double max_ode_residual(const ModelParams& params,
                        const std::function<CurvePoint(double)>& f,
                        std::span<const double> grid) {
  double worst = 0.0;
  for (double x : grid) worst = std::max(worst, ode_residual(params, f(x)));
  return worst;
}

std::vector<double> ode_grid(double barrier, std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = barrier * static_cast<double>(i) / static_cast<double>(n);
  }
  return grid;
}

VerificationReport ode_residual_sweep(const Candidate& cand, const ModelParams& params,
                                      std::span<const double> grid) {
  check_grid(grid);
  VerificationReport report;
  const double b = cand.value.barrier();
  const double f_b = cand.value.at(b).value;
  double affine_err = 0.0;
  bool any_affine = false;
  for (double x : grid) {
    if (x < b) {
      report.max_ode_residual =
          std::max(report.max_ode_residual, ode_residual(params, cand.value.at(x)));
    } else if (x > b) {
      any_affine = true;
      affine_err = std::max(affine_err, std::abs(cand.value(x) - (x - b + f_b)));
    }
  }
  if (any_affine) note_error(report, name(cand, "affine_branch"), affine_err);
  return report;
}

VerificationReport boundary_conditions(const Candidate& cand, const ModelParams& params,
                                       const VerificationTolerances& tol) {
  VerificationReport report;
  const double b = cand.value.barrier();
  const CurvePoint origin = cand.value.at(0.0);
  const CurvePoint edge = cand.value.at(b);  // left limits at the kink
  if (cand.which == Which::G) {
    note_error(report, name(cand, "f(0)"), std::abs(origin.value));
  } else {
    note_error(report, name(cand, "f'(0)-k"), std::abs(origin.first - params.k()));
  }
  note_error(report, name(cand, "f'(b)-1"), std::abs(edge.first - 1.0));
  if (cand.at_free_barrier()) {
    note_error(report, name(cand, "smooth_fit_f''(b-)"), std::abs(edge.second));
  } else if (!(edge.second > -tol.inequality_slack)) {
    report.inequality_violations.push_back(
        {name(cand, "f''(b_r-)>0"), b, -edge.second});
  }
  return report;
}

VerificationReport theorem_inequalities(const Candidate& cand, const ModelParams& params,
                                        std::span<const double> grid,
                                        const VerificationTolerances& tol) {
  check_grid(grid);
  VerificationReport report;
  const double b = cand.value.barrier();
  const double slack = tol.inequality_slack;
  const double k = params.k();
  for (double x : grid) {
    const CurvePoint p = cand.value.at(x);
    if (x > b) {
      const double gen = params.mu() - params.alpha() * p.value;
      if (gen > slack) report.inequality_violations.push_back({"mu-alpha*g<=0", x, gen});
    }
    if (p.first > k + slack) {
      report.inequality_violations.push_back({"g'<=k", x, p.first - k});
    }
    if (cand.at_free_barrier()) {
      if (p.first < 1.0 - slack) {
        report.inequality_violations.push_back({"g'>=1", x, 1.0 - p.first});
      }
    } else if (x >= cand.payout_barrier && std::abs(p.first - 1.0) > slack) {
      report.inequality_violations.push_back({"g'=1 above b_r", x, std::abs(p.first - 1.0)});
    }
    if (p.value < -slack) report.inequality_violations.push_back({"g>=0", x, -p.value});
  }
  return report;
}

VerificationReport theorem_inequalities(const Solution& sol, std::span<const double> grid,
                                        const VerificationTolerances& tol) {
  return theorem_inequalities(optimal_candidate(sol), sol.params, grid, tol);
}

std::vector<double> inequality_grid(double barrier, std::size_t n, double span) {
  return linspace(0.0, barrier + span, n);
}

ConvexityResult convexity_switch_check(const Candidate& cand, std::span<const double> grid,
                                       const VerificationTolerances& tol) {
  check_grid(grid);
  ConvexityResult out;
  const double b = cand.value.barrier();
  const double slack = tol.inequality_slack;
  const std::string cond = name(cand, "convexity");

  int prev_sign = 0;
  double prev_x = 0.0;
  double prev_val = 0.0;
  for (double x : grid) {
    if (x >= b) break;
    const double v = cand.value.second(x);
    const int sign = v < -slack ? -1 : (v > slack ? 1 : 0);
    if (sign == 0) continue;
    if (cand.at_free_barrier() && sign > 0) {
      out.report.inequality_violations.push_back({cond + ":g''<0 below free barrier", x, v});
    }
    if (prev_sign != 0 && sign != prev_sign) {
      ++out.sign_changes;
      if (prev_sign > 0) {
        out.report.inequality_violations.push_back({cond + ":switch from convex to concave", x, -v});
      }
      if (!out.switch_point) {
        out.switch_point = prev_x + (x - prev_x) * prev_val / (prev_val - v);
      }
    }
    prev_sign = sign;
    prev_x = x;
    prev_val = v;
  }
  if (out.sign_changes > 1) {
    out.report.inequality_violations.push_back(
        {cond + ":more than one sign change", b, static_cast<double>(out.sign_changes)});
  }
  return out;
}

VerificationReport verify_solution(const Solution& sol, const VerifyOptions& opts) {
  VerificationReport report;
  for (const Candidate& cand : {candidate_G(sol), candidate_H(sol)}) {
    const double b = cand.value.barrier();
    const std::vector<double> below = ode_grid(b, opts.ode_points);
    std::vector<double> grid = below;
    for (double x : linspace(b, b + opts.inequality_span, opts.ode_points)) {
      if (x > b) grid.push_back(x);
    }
    report.merge(ode_residual_sweep(cand, sol.params, grid));
    report.merge(boundary_conditions(cand, sol.params, opts.tol));
    report.merge(convexity_switch_check(cand, below, opts.tol).report);
  }
  const Candidate best = optimal_candidate(sol);
  report.merge(theorem_inequalities(
      best, sol.params,
      inequality_grid(best.value.barrier(), opts.inequality_points, opts.inequality_span),
      opts.tol));
  report.evaluate(opts.tol);
  return report;
}

}  // namespace regdiv
