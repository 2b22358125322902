#pragma once

// JSON and CSV renderings of the solver, verifier and simulator outputs.
// JSON field names follow the struct member names.

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "regdiv/core_math.hpp"
#include "regdiv/simulator.hpp"
#include "regdiv/value_functions.hpp"
#include "regdiv/verification.hpp"

namespace regdiv {

void to_json(nlohmann::json& j, const ModelParams& p);
void to_json(nlohmann::json& j, const Roots& r);
void to_json(nlohmann::json& j, const CostRegime& c);
void to_json(nlohmann::json& j, const BarrierSet& b);
void from_json(const nlohmann::json& j, BarrierSet& b);
void to_json(nlohmann::json& j, const StrategySpec& s);
void to_json(nlohmann::json& j, const ValueCurve& c);
void to_json(nlohmann::json& j, const VerificationReport& r);
void to_json(nlohmann::json& j, const SimEstimate& e);
void to_json(nlohmann::json& j, const RuinMoments& m);
void to_json(nlohmann::json& j, const DtStudy& s);

// precision == 0: shortest representation that parses back to the same
// double; otherwise `precision` significant digits.
std::string format_number(double v, int precision = 0);

// Header `x_or_br,G,H,V`, one row per abscissa.
void write_curve_csv(std::ostream& out, const ValueCurve& curve, int precision = 0);

}  // namespace regdiv
