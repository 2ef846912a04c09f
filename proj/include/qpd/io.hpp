// Copyright 2026 The qpd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV and JSON encodings of the library types.

#ifndef QPD_IO_HPP_
#define QPD_IO_HPP_

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpd/cluster.hpp"
#include "qpd/game.hpp"
#include "qpd/noise.hpp"

namespace qpd {

using nlohmann::json;

// Malformed input (unknown names, wrong JSON types).
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Well-formed input with a value outside its allowed range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// 15 significant digits, shortest form ("%.15g").
std::string format_number(double v);

// CSV: header p_a,p_b,payoff_a,payoff_b; rows in row-major grid order.
void write_surface_csv(std::ostream& out, const PayoffTable& surface);
// CSV: sigma,gap_a,stderr_a,negativity
void write_gap_csv(std::ostream& out, const std::vector<GapPoint>& points);

struct MixedRow {
  double x;
  Payoffs payoffs;
  bool ppt;
};
// CSV: x,payoff_a,payoff_b,ppt
void write_mixed_csv(std::ostream& out, const std::vector<MixedRow>& rows);

// {"num_qubits": n, "amplitudes": [[re, im], ...]}, qubit 0 = most significant bit.
json state_to_json(const State& s);
State state_from_json(const json& j);
// {"num_qubits": n, "entries": [[[re, im], ...], ...]} (row-major).
json density_to_json(const Density& rho);

// "c" | "d" | "q" | "m" | {"theta": t, "phi": f} | {"p": p} | p (a number).
json strategy_to_json(const Strategy& s);
Strategy strategy_from_json(const json& j);
// {"a": S, "b": S}, ["S", "S"] or "S,S".
StrategyProfile profile_from_json(const json& j);
StrategyProfile parse_profile(const std::string& text);
Strategy parse_strategy(const std::string& text);

json distribution_to_json(const OutcomeDistribution& d);
json payoffs_to_json(const Payoffs& p);

json pattern_to_json(const MeasurementPattern& p);
json convention_to_json(const ConventionConfig& c);
ConventionConfig convention_from_json(const json& j);
// {"matched": k, "candidates": n, "selected": {...}, "max_tv_deviation": x, ...}
json calibration_to_json(const CalibrationReport& r);
json surface_to_json(const PayoffTable& surface, GameVariant variant);

}  // namespace qpd

#endif  // QPD_IO_HPP_
