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

#include "qpd/io.hpp"

#include <cstdio>
#include <sstream>

namespace qpd {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

void write_surface_csv(std::ostream& out, const PayoffTable& surface) {
  if (surface.a_params.size() != surface.rows() || surface.b_params.size() != surface.cols()) {
    throw std::invalid_argument("surface CSV needs a p-grid table");
  }
  out << "p_a,p_b,payoff_a,payoff_b\n";
  for (std::size_t i = 0; i < surface.rows(); ++i) {
    for (std::size_t j = 0; j < surface.cols(); ++j) {
      const Payoffs& p = surface.at(i, j);
      out << format_number(surface.a_params[i]) << ',' << format_number(surface.b_params[j])
          << ',' << format_number(p.a) << ',' << format_number(p.b) << '\n';
    }
  }
}

void write_gap_csv(std::ostream& out, const std::vector<GapPoint>& points) {
  out << "sigma,gap_a,stderr_a,negativity\n";
  for (const auto& p : points) {
    out << format_number(p.sigma) << ',' << format_number(p.gap_a) << ','
        << format_number(p.stderr_a) << ',' << format_number(p.negativity) << '\n';
  }
}

void write_mixed_csv(std::ostream& out, const std::vector<MixedRow>& rows) {
  out << "x,payoff_a,payoff_b,ppt\n";
  for (const auto& r : rows) {
    out << format_number(r.x) << ',' << format_number(r.payoffs.a) << ','
        << format_number(r.payoffs.b) << ',' << (r.ppt ? "true" : "false") << '\n';
  }
}

json state_to_json(const State& s) {
  json amps = json::array();
  for (Eigen::Index i = 0; i < s.dim(); ++i) amps.push_back({s[i].real(), s[i].imag()});
  return {{"num_qubits", s.num_qubits()}, {"amplitudes", amps}};
}

State state_from_json(const json& j) {
  try {
    const int n = j.at("num_qubits").get<int>();
    const auto& amps = j.at("amplitudes");
    Ket<double> v(static_cast<Eigen::Index>(amps.size()));
    for (std::size_t i = 0; i < amps.size(); ++i) {
      v(static_cast<Eigen::Index>(i)) = {amps[i].at(0).get<double>(), amps[i].at(1).get<double>()};
    }
    return State(n, std::move(v));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad state JSON: ") + e.what());
  }
}

json density_to_json(const Density& rho) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < rho.dim(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < rho.dim(); ++c) row.push_back({rho(r, c).real(), rho(r, c).imag()});
    rows.push_back(row);
  }
  return {{"num_qubits", rho.num_qubits()}, {"entries", rows}};
}

json strategy_to_json(const Strategy& s) {
  if (s.is_named()) return std::string(1, static_cast<char>(s.move()));
  return {{"theta", s.angles().theta}, {"phi", s.angles().phi}};
}

namespace {

template <typename F>
auto with_range_errors(F&& f) {
  try {
    return f();
  } catch (const std::out_of_range& e) {
    throw RangeError(e.what());
  }
}

double number_field(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

Strategy strategy_from_json(const json& j) {
  if (j.is_string()) return parse_strategy(j.get<std::string>());
  if (j.is_number()) {
    const double p = j.get<double>();
    return with_range_errors([&] { return Strategy::from_p(p); });
  }
  if (j.is_object()) {
    if (j.contains("p")) {
      const double p = number_field(j, "p", 0);
      return with_range_errors([&] { return Strategy::from_p(p); });
    }
    if (j.contains("theta") || j.contains("phi")) {
      const double theta = number_field(j, "theta", 0);
      const double phi = number_field(j, "phi", 0);
      return with_range_errors([&] { return Strategy::parametric(theta, phi); });
    }
    if (j.contains("name")) return strategy_from_json(j.at("name"));
  }
  throw ParseError("strategy must be one of \"c\",\"d\",\"q\",\"m\", {\"theta\",\"phi\"} or {\"p\"}");
}

Strategy parse_strategy(const std::string& text) {
  if (auto m = parse_move(text)) return *m;
  if (text.rfind("p=", 0) == 0 || text.rfind("p:", 0) == 0) {
    const std::string num = text.substr(2);
    std::size_t used = 0;
    double p = 0;
    try {
      p = std::stod(num, &used);
    } catch (const std::exception&) {
      throw ParseError("bad p value '" + num + "'");
    }
    if (used != num.size()) throw ParseError("bad p value '" + num + "'");
    return with_range_errors([&] { return Strategy::from_p(p); });
  }
  if (!text.empty() && (text.front() == '{' || std::isdigit(static_cast<unsigned char>(text.front())) ||
                        text.front() == '-')) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception&) {
      throw ParseError("bad strategy '" + text + "'");
    }
    return strategy_from_json(j);
  }
  throw ParseError("unknown strategy '" + text + "'");
}

StrategyProfile profile_from_json(const json& j) {
  if (j.is_string()) return parse_profile(j.get<std::string>());
  if (j.is_array() && j.size() == 2) return {strategy_from_json(j[0]), strategy_from_json(j[1])};
  if (j.is_object() && j.contains("a") && j.contains("b")) {
    return {strategy_from_json(j.at("a")), strategy_from_json(j.at("b"))};
  }
  throw ParseError("profile must be {\"a\": S, \"b\": S}, [S, S] or \"S,S\"");
}

StrategyProfile parse_profile(const std::string& text) {
  std::string t;
  for (char ch : text) {
    if (ch != '(' && ch != ')' && ch != ' ') t.push_back(ch);
  }
  // Split on the comma that is not inside braces.
  int depth = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] == '{') ++depth;
    if (t[k] == '}') --depth;
    if (t[k] == ',' && depth == 0) {
      return {parse_strategy(t.substr(0, k)), parse_strategy(t.substr(k + 1))};
    }
  }
  if (t.size() == 2) return {parse_strategy(t.substr(0, 1)), parse_strategy(t.substr(1, 1))};
  throw ParseError("profile must look like 'd,d'");
}

json distribution_to_json(const OutcomeDistribution& d) {
  return {{"cc", d.p_cc}, {"cd", d.p_cd}, {"dc", d.p_dc}, {"dd", d.p_dd}};
}

json payoffs_to_json(const Payoffs& p) { return {{"a", p.a}, {"b", p.b}}; }

namespace {

std::string_view resource_name(Resource r) {
  switch (r) {
    case Resource::box: return "box";
    case Resource::wafer: return "wafer";
    case Resource::graph: return "graph";
  }
  return "?";
}

}  // namespace

json pattern_to_json(const MeasurementPattern& p) {
  json measured = json::array();
  for (const auto& m : p.measured) {
    measured.push_back({{"wire", m.wire},
                        {"angle", m.angle},
                        {"keep_branch", m.keep_branch == Branch::plus ? "plus" : "minus"},
                        {"layer", m.layer}});
  }
  json imports = json::object();
  for (const auto& [wire, op] : p.imports) {
    json o = {{"op", op.name()}};
    if (op.kind == ImportOp::Kind::rx || op.kind == ImportOp::Kind::rz) o["mu"] = op.mu;
    imports[std::to_string(wire)] = o;
  }
  json out = {{"name", p.name},
              {"resource", resource_name(p.resource)},
              {"measured", measured},
              {"imports", imports},
              {"output_wires", p.output_wires}};
  if (p.graph) out["graph"] = {{"num_qubits", p.graph->num_qubits}, {"edges", p.graph->edges}};
  return out;
}

json convention_to_json(const ConventionConfig& c) {
  return {{"angle_sign", c.angle_sign()},
          {"swap_players", c.swap_players()},
          {"plus_label", std::string(1, static_cast<char>(c.plus_label()))},
          {"import_side", c.import_side() == ImportSide::circuit ? "circuit" : "physical"},
          {"wafer_layer_signs", c.wafer_layer_signs()}};
}

ConventionConfig convention_from_json(const json& j) {
  try {
    const auto label = parse_move(j.at("plus_label").get<std::string>());
    if (!label) throw ParseError("plus_label must be c or d");
    const std::string side = j.at("import_side").get<std::string>();
    if (side != "circuit" && side != "physical") throw ParseError("bad import_side");
    return convention_from_fields(j.at("angle_sign").get<int>(), j.at("swap_players").get<bool>(),
                                  *label,
                                  side == "circuit" ? ImportSide::circuit : ImportSide::physical,
                                  j.at("wafer_layer_signs").get<std::array<int, 2>>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad convention JSON: ") + e.what());
  }
}

json calibration_to_json(const CalibrationReport& r) {
  auto checks = [](const std::vector<PatternCheck>& list) {
    json a = json::array();
    for (const auto& c : list) {
      a.push_back({{"pattern", c.name},
                   {"tv", c.tv},
                   {"postselection_probability", c.postselection_probability}});
    }
    return a;
  };
  json out = {{"matched", r.matched},
              {"candidates", r.candidates},
              {"max_tv_deviation", r.max_tv_deviation},
              {"patterns", checks(r.patterns)},
              {"wafer", checks(r.wafer)}};
  out["selected"] = r.selected ? convention_to_json(*r.selected) : json(nullptr);
  return out;
}

json surface_to_json(const PayoffTable& surface, GameVariant variant) {
  json rows = json::array();
  for (std::size_t i = 0; i < surface.rows(); ++i) {
    for (std::size_t j = 0; j < surface.cols(); ++j) {
      const Payoffs& p = surface.at(i, j);
      rows.push_back({{"p_a", surface.a_params.at(i)},
                      {"p_b", surface.b_params.at(j)},
                      {"payoff_a", p.a},
                      {"payoff_b", p.b}});
    }
  }
  return {{"steps", surface.rows()}, {"variant", to_string(variant)}, {"rows", rows}};
}

}  // namespace qpd
