#include "regdiv/value_functions.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace regdiv {
namespace {

using testing::base_solution;
using testing::payout_barriers;
using testing::sample_params;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// tests/oracle/closed_form.py
TEST(Oracle, BaseCaseValues) {
  const Solution s0 = base_solution(0.0);
  EXPECT_LT(rel(eval_H(0.5, s0), 1.1295573359007346869), 1e-13);
  EXPECT_LT(rel(eval_H(1.0, s0), 1.6295573359007346869), 1e-13);
  EXPECT_LT(rel(eval_G(0.5, s0), 0.55069331941835888053), 1e-13);
  EXPECT_LT(rel(eval_G(2.0, s0), 2.0524398446053071855), 1e-13);

  const Solution s14 = base_solution(1.4);
  EXPECT_LT(rel(eval_H(1.0, s14), 0.97678039490120850049), 1e-13);
  EXPECT_LT(rel(eval_H(0.0, s14), 0.080595792689073612193), 1e-12);
  EXPECT_LT(rel(eval_G(1.0, s14), 0.93312190407073584282), 1e-13);

  const Solution s24 = base_solution(2.4);
  EXPECT_LT(rel(eval_G(1.0, s24), 0.58655456075750417606), 1e-13);
  EXPECT_LT(rel(eval_H(1.0, s24), 0.47299212951707563752), 1e-13);
  EXPECT_LT(rel(eval_H(0.0, s24), -0.30795578978318920995), 1e-12);
}

TEST(Oracle, ValueAtFreeBarrierIsMuOverAlpha) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 1000; ++i) {
    const Solution sol = solve(sample_params(rng));
    const double annuity = sol.params.mu() / sol.params.alpha();
    EXPECT_LT(rel(eval_G(sol.barriers.b_star, sol), annuity), 1e-10);
    EXPECT_LT(rel(eval_H(sol.barriers.b_double_star, sol), annuity), 1e-10);
  }
}

TEST(Boundary, GVanishesAtZeroAndHHasSlopeK) {
  std::mt19937_64 rng(103);
  for (int i = 0; i < 200; ++i) {
    const Solution base = solve(sample_params(rng));
    for (double br : payout_barriers(base)) {
      const Solution sol = base.with_payout_barrier(br);
      EXPECT_LE(std::abs(eval_G(0.0, sol)), 1e-15);
      EXPECT_LT(rel(eval_H_prime(0.0, sol), sol.params.k()), 1e-12);
      EXPECT_LT(std::abs(eval_G_prime(sol.barriers.b_effective_G, sol) - 1.0), 1e-12);
      EXPECT_LT(std::abs(eval_H_prime(sol.barriers.b_effective_H, sol) - 1.0), 1e-12);
    }
  }
}

TEST(Derivatives, MatchFiniteDifferences) {
  std::mt19937_64 rng(107);
  for (int i = 0; i < 200; ++i) {
    const Solution sol = solve(sample_params(rng)).with_payout_barrier(0.0);
    for (const BarrierValue& f : {value_G(sol), value_H(sol)}) {
      const double b = f.barrier();
      const double h = 1e-5 * b;
      for (double x : {0.2 * b, 0.5 * b, 0.8 * b, 1.5 * b, 3.0 * b}) {
        const double d1 = (f(x + h) - f(x - h)) / (2 * h);
        const double d2 = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
        const double scale1 = std::abs(f.first(x)) + 1.0;
        const double scale2 = std::abs(f.second(x)) + std::abs(f(x)) / (b * b) + 1.0;
        EXPECT_LT(std::abs(d1 - f.first(x)) / scale1, 1e-6) << x;
        EXPECT_LT(std::abs(d2 - f.second(x)) / scale2, 1e-3) << x;
      }
    }
  }
}

TEST(Smoothness, ContinuousFirstDerivativeAcrossBarrier) {
  std::mt19937_64 rng(109);
  for (int i = 0; i < 200; ++i) {
    const Solution base = solve(sample_params(rng));
    for (double br : payout_barriers(base)) {
      const Solution sol = base.with_payout_barrier(br);
      for (const BarrierValue& f : {value_G(sol), value_H(sol)}) {
        const double b = f.barrier();
        const double below = std::nextafter(b, 0.0);
        const double above = std::nextafter(b, 2 * b);
        EXPECT_LT(std::abs(f(below) - f(above)), 1e-12 * (1 + std::abs(f(b))));
        EXPECT_LT(std::abs(f.first(below) - f.first(above)), 1e-10);
      }
    }
  }
}

TEST(Smoothness, SecondDerivativeVanishesAtFreeBarriers) {
  std::mt19937_64 rng(113);
  for (int i = 0; i < 1000; ++i) {
    const Solution sol = solve(sample_params(rng));
    const CurvePoint g = eval_G_second(sol.barriers.b_star, sol);
    const CurvePoint h = eval_H_second(sol.barriers.b_double_star, sol);
    EXPECT_TRUE(g.at_kink);
    EXPECT_TRUE(h.at_kink);
    EXPECT_LT(std::abs(g.second) * sol.barriers.b_star, 1e-10);
    EXPECT_LT(std::abs(h.second) * sol.barriers.b_double_star, 1e-10);
  }
}

TEST(Smoothness, PerturbedBarrierBreaksSmoothFit) {
  const Solution sol = base_solution();
  const BarrierValue g = BarrierValue::upper(sol.roots, 1.1 * sol.barriers.b_star);
  EXPECT_GT(std::abs(g.at(g.barrier()).second), 1e-3);
}

TEST(Affine, SlopeOneAboveBarrier) {
  const Solution sol = base_solution(0.3);
  const BarrierValue g = value_G(sol);
  const BarrierValue h = value_H(sol);
  for (double x : {1.0, 2.0, 10.0}) {
    EXPECT_NEAR(g(x + 5.0) - g(x), 5.0, 1e-12);
    EXPECT_EQ(g.first(x), 1.0);
    EXPECT_EQ(g.second(x), 0.0);
    EXPECT_NEAR(h(x + 5.0) - h(x), 5.0, 1e-12);
  }
}

TEST(Strategy, BaseCaseSelection) {
  const Solution s0 = base_solution(0.0);
  StrategySpec st = optimal_strategy(s0);
  EXPECT_EQ(st.kind, StrategyKind::DoubleBarrier);
  EXPECT_EQ(st.upper, s0.barriers.b_double_star);
  EXPECT_EQ(st.lower, 0.0);
  EXPECT_FALSE(st.both_optimal);

  st = optimal_strategy(base_solution(1.4));
  EXPECT_EQ(st.kind, StrategyKind::DoubleBarrier);
  EXPECT_EQ(st.upper, 1.4);

  st = optimal_strategy(base_solution(2.4));
  EXPECT_EQ(st.kind, StrategyKind::UpperBarrier);
  EXPECT_EQ(st.upper, 2.4);
  EXPECT_FALSE(st.lower.has_value());

  const double b_hat = *s0.barriers.b_hat;
  st = optimal_strategy(base_solution(b_hat));
  EXPECT_EQ(st.kind, StrategyKind::DoubleBarrier);
  EXPECT_TRUE(st.both_optimal);
  EXPECT_LT(std::abs(eval_H(0.0, base_solution(b_hat))), 1e-12);
  EXPECT_EQ(optimal_strategy(base_solution(b_hat * 1.001)).kind, StrategyKind::UpperBarrier);

  const Solution high = solve(ModelParams::from_sigma2(0.04, 0.15, 0.05, 1.3));
  st = optimal_strategy(high);
  EXPECT_EQ(st.kind, StrategyKind::UpperBarrier);
  EXPECT_EQ(st.upper, high.barriers.b_star);
  EXPECT_EQ(to_string(st.kind), "UpperBarrier");
}

TEST(Strategy, ValueOfSelectedStrategyIsTheMaximum) {
  std::mt19937_64 rng(127);
  for (int i = 0; i < 200; ++i) {
    const Solution base = solve(sample_params(rng));
    for (double br : payout_barriers(base)) {
      const Solution sol = base.with_payout_barrier(br);
      const StrategySpec st = optimal_strategy(sol);
      const BarrierValue v = value_of(st, sol);
      const double top = 2.0 * std::max(sol.barriers.b_effective_G, sol.barriers.b_effective_H);
      for (double x : linspace(0.0, top, 41)) {
        const double V = eval_V(x, sol);
        EXPECT_LE(std::abs(v(x) - V), 1e-11 * (1.0 + std::abs(V)))
            << "x=" << x << " br=" << br << " kind=" << to_string(st.kind);
      }
    }
  }
}

TEST(Strategy, CrossoverSignOfHAtZero) {
  std::mt19937_64 rng(131);
  for (int i = 0; i < 500; ++i) {
    const Solution base = solve(sample_params(rng));
    if (!base.barriers.b_hat) continue;
    const double b_hat = *base.barriers.b_hat;
    EXPECT_GT(eval_H(0.0, base.with_payout_barrier(0.5 * b_hat)), 0.0);
    EXPECT_LT(eval_H(0.0, base.with_payout_barrier(1.5 * b_hat)), 0.0);
    EXPECT_LT(std::abs(eval_H(0.0, base.with_payout_barrier(b_hat))),
              1e-9 * (1.0 + base.params.mu() / base.params.alpha()));
  }
}

TEST(Domain, Errors) {
  const Solution sol = base_solution();
  EXPECT_THROW(eval_G(-1e-12, sol), DomainError);
  EXPECT_THROW(eval_H(std::numeric_limits<double>::quiet_NaN(), sol), DomainError);
  EXPECT_THROW(BarrierValue::upper(sol.roots, 0.0), DomainError);
  EXPECT_THROW(BarrierValue::double_barrier(sol.roots, 1.1, -1.0), DomainError);
  EXPECT_THROW(BarrierValue::upper(sol.roots, std::numeric_limits<double>::infinity()),
               DomainError);
}

TEST(Domain, LargeBarrierStaysFinite) {
  std::mt19937_64 rng(137);
  for (int i = 0; i < 200; ++i) {
    const Solution base = solve(sample_params(rng));
    const Solution sol = base.with_payout_barrier(base.params.max_payout_barrier());
    for (double x : {0.0, 1.0, 0.5 * sol.params.b_r(), sol.params.b_r(), 2.0 * sol.params.b_r()}) {
      EXPECT_TRUE(std::isfinite(eval_G(x, sol)));
      EXPECT_TRUE(std::isfinite(eval_H(x, sol)));
      EXPECT_TRUE(std::isfinite(eval_G_second(x, sol).second));
    }
  }
}

TEST(Sweep, SurplusGrid) {
  const Solution sol = base_solution(1.4);
  const std::vector<double> xs = linspace(0.0, 2.5, 501);
  ASSERT_EQ(xs.size(), 501u);
  EXPECT_EQ(xs.front(), 0.0);
  EXPECT_EQ(xs.back(), 2.5);
  const ValueCurve c = sweep_surplus(sol, xs);
  EXPECT_EQ(c.mode, SweepMode::SurplusGrid);
  EXPECT_EQ(c.fixed, 1.4);
  ASSERT_EQ(c.values_V.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_EQ(c.values_G[i], eval_G(xs[i], sol));
    EXPECT_EQ(c.values_H[i], eval_H(xs[i], sol));
    EXPECT_EQ(c.values_V[i], std::max(c.values_G[i], c.values_H[i]));
  }
}

TEST(Sweep, CrossingStructure) {
  const double b_hat = *base_solution().barriers.b_hat;
  for (double br : {0.0, 1.4}) {
    const ValueCurve c = sweep_surplus(base_solution(br), std::vector<double>{0.0});
    EXPECT_GT(c.values_H[0], c.values_G[0]) << br;
  }
  const ValueCurve c = sweep_surplus(base_solution(2.4), std::vector<double>{0.0});
  EXPECT_LT(c.values_H[0], c.values_G[0]);
  EXPECT_LT(std::abs(sweep_surplus(base_solution(b_hat), std::vector<double>{0.0}).values_H[0]),
            1e-12);
}

TEST(Sweep, PayoutBarrierGridMonotone) {
  const Solution sol = base_solution();
  const std::vector<double> brs = linspace(0.0, 8.0, 501);
  for (double x : {0.5, 1.0, 2.0}) {
    const ValueCurve c = sweep_payout_barrier(sol, x, brs);
    EXPECT_EQ(c.mode, SweepMode::PayoutBarrierGrid);
    EXPECT_EQ(c.fixed, x);
    for (std::size_t i = 1; i < brs.size(); ++i) {
      EXPECT_LE(c.values_V[i], c.values_V[i - 1] + 1e-13) << brs[i];
      if (brs[i] <= sol.barriers.b_double_star) {
        EXPECT_EQ(c.values_V[i], c.values_V[0]) << brs[i];
      } else {
        EXPECT_LT(c.values_V[i], c.values_V[i - 1]) << brs[i];
      }
    }
  }
}

TEST(Sweep, GridErrors) {
  const Solution sol = base_solution();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sweep_surplus(sol, std::vector<double>{}), GridError);
  EXPECT_THROW(sweep_surplus(sol, std::vector<double>{0.0, 1.0, 0.5}), GridError);
  EXPECT_THROW(sweep_surplus(sol, std::vector<double>{0.0, 0.0}), GridError);
  EXPECT_THROW(sweep_surplus(sol, std::vector<double>{-1.0, 1.0}), GridError);
  EXPECT_THROW(sweep_surplus(sol, std::vector<double>{0.0, nan}), GridError);
  EXPECT_THROW(sweep_payout_barrier(sol, 1.0, std::vector<double>{}), GridError);
  EXPECT_THROW(sweep_payout_barrier(sol, -1.0, std::vector<double>{0.0}), DomainError);
  EXPECT_TRUE(linspace(0.0, 1.0, 0).empty());
  EXPECT_EQ(linspace(0.3, 1.0, 1), std::vector<double>{0.3});
}

}  // namespace
}  // namespace regdiv
