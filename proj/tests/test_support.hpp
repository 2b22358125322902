#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "regdiv/core_math.hpp"

namespace regdiv::testing {

// mu in [0.005, 0.5], sigma^2 in [0.01, 1], alpha in [0.005, 0.5], k in (1, 3].
inline ModelParams sample_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mu(0.005, 0.5);
  std::uniform_real_distribution<double> s2(0.01, 1.0);
  std::uniform_real_distribution<double> alpha(0.005, 0.5);
  std::uniform_real_distribution<double> k(0.0, 2.0);
  const double kk = 3.0 - k(rng);  // (1, 3]
  return ModelParams::from_sigma2(mu(rng), s2(rng), alpha(rng), kk);
}

// Seven payout barriers covering both sides of each free barrier.
inline std::vector<double> payout_barriers(const Solution& sol) {
  const BarrierSet& b = sol.barriers;
  std::vector<double> out;
  if (b.b_hat) {
    out = {0.0,
           0.5 * b.b_double_star,
           b.b_double_star,
           0.5 * (b.b_double_star + b.b_star),
           b.b_star,
           *b.b_hat,
           1.5 * *b.b_hat};
  } else {
    out = {0.0,
           0.5 * b.b_star,
           b.b_star,
           0.5 * (b.b_star + b.b_double_star),
           b.b_double_star,
           1.5 * b.b_double_star,
           3.0 * b.b_double_star};
  }
  const double cap = sol.params.max_payout_barrier();
  for (double& v : out) v = std::min(v, cap);
  return out;
}

inline Solution base_solution(double b_r = 0.0) {
  return solve(ModelParams::from_sigma2(0.04, 0.15, 0.05, 1.01, b_r));
}

}  // namespace regdiv::testing
