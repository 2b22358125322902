#include "regdiv/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace regdiv {

using nlohmann::json;

void to_json(json& j, const ModelParams& p) {
  j = json{{"mu", p.mu()}, {"sigma", p.sigma()}, {"alpha", p.alpha()}, {"k", p.k()},
           {"b_r", p.b_r()}};
}

void to_json(json& j, const Roots& r) { j = json{{"r1", r.r1}, {"r2", r.r2}}; }

void to_json(json& j, const CostRegime& c) {
  j = json{{"regime", to_string(c.regime)}, {"k_critical", c.k_critical}};
}

void to_json(json& j, const BarrierSet& b) {
  j = json{{"b_star", b.b_star},
           {"b_double_star", b.b_double_star},
           {"b_effective_G", b.b_effective_G},
           {"b_effective_H", b.b_effective_H}};
  if (b.b_hat) j["b_hat"] = *b.b_hat;
}

void from_json(const json& j, BarrierSet& b) {
  b.b_star = j.at("b_star").get<double>();
  b.b_double_star = j.at("b_double_star").get<double>();
  if (j.contains("b_hat") && !j.at("b_hat").is_null()) {
    b.b_hat = j.at("b_hat").get<double>();
  } else {
    b.b_hat.reset();
  }
  b.b_effective_G = j.at("b_effective_G").get<double>();
  b.b_effective_H = j.at("b_effective_H").get<double>();
}

void to_json(json& j, const StrategySpec& s) {
  j = json{{"kind", to_string(s.kind)},
           {"upper", s.upper},
           {"lower", s.lower ? json(*s.lower) : json(nullptr)},
           {"both_optimal", s.both_optimal}};
}

void to_json(json& j, const ValueCurve& c) {
  j = json{{"mode", c.mode == SweepMode::SurplusGrid ? "surplus" : "payout_barrier"},
           {"abscissae", c.abscissae},
           {"values_G", c.values_G},
           {"values_H", c.values_H},
           {"values_V", c.values_V}};
  j[c.mode == SweepMode::SurplusGrid ? "b_r" : "x"] = c.fixed;
}

void to_json(json& j, const VerificationReport& r) {
  json violations = json::array();
  for (const Violation& v : r.inequality_violations) {
    violations.push_back({{"condition", v.condition}, {"x", v.x}, {"magnitude", v.magnitude}});
  }
  j = json{{"max_ode_residual", r.max_ode_residual},
           {"boundary_errors", r.boundary_errors},
           {"inequality_violations", violations},
           {"passed", r.passed}};
}

namespace {

json moments_json(const std::vector<MomentEstimate>& ms) {
  json out = json::array();
  for (const MomentEstimate& m : ms) {
    out.push_back({{"order", m.order}, {"value", m.value}, {"std_error", m.std_error}});
  }
  return out;
}

json levels_json(const std::vector<LevelEstimate>& ls) {
  json out = json::array();
  for (const LevelEstimate& l : ls) {
    out.push_back({{"dt", l.dt}, {"mean", l.mean}, {"std_error", l.std_error}});
  }
  return out;
}

}  // namespace

void to_json(json& j, const SimEstimate& e) {
  j = json{{"mean", e.mean},
           {"stderr", e.std_error},
           {"n_paths", e.n_paths},
           {"n_samples", e.n_samples},
           {"ruin_fraction", e.ruin_fraction},
           {"mean_dividends", e.mean_dividends},
           {"mean_injections", e.mean_injections},
           {"payout_violations", e.payout_violations},
           {"ruin_time_moments", moments_json(e.ruin_time_moments)},
           {"censored_fraction", e.censored_fraction},
           {"dt", e.dt},
           {"horizon", e.horizon}};
}

void to_json(json& j, const RuinMoments& m) {
  j = json{{"moments", moments_json(m.moments)},
           {"ruin_fraction", m.ruin_fraction},
           {"censored_fraction", m.censored_fraction},
           {"reliable", m.reliable},
           {"n_paths", m.n_paths}};
}

void to_json(json& j, const DtStudy& s) {
  j = json{{"levels", levels_json(s.levels)},
           {"corrections", levels_json(s.corrections)},
           {"shrink_factors", s.shrink_factors},
           {"sqrt_dt_constant", s.sqrt_dt_constant}};
}

std::string format_number(double v, int precision) {
  char buf[64];
  if (precision <= 0) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
  }
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

void write_curve_csv(std::ostream& out, const ValueCurve& curve, int precision) {
  out << "x_or_br,G,H,V\n";
  for (std::size_t i = 0; i < curve.abscissae.size(); ++i) {
    out << format_number(curve.abscissae[i], precision) << ','
        << format_number(curve.values_G[i], precision) << ','
        << format_number(curve.values_H[i], precision) << ','
        << format_number(curve.values_V[i], precision) << '\n';
  }
}

}  // namespace regdiv
