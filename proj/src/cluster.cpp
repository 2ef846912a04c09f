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

#include "qpd/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace qpd {

void GraphSpec::validate() const {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("graph size out of range");
  }
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_qubits || b >= num_qubits) {
      throw std::invalid_argument("edge vertex out of range");
    }
    if (a == b) throw std::invalid_argument("self-loop in graph");
    if (!seen.insert(std::minmax(a, b)).second) {
      throw std::invalid_argument("duplicate edge in graph");
    }
  }
}

std::vector<int> GraphSpec::neighbors(int vertex) const {
  std::vector<int> out;
  for (auto [a, b] : edges) {
    if (a == vertex) out.push_back(b);
    if (b == vertex) out.push_back(a);
  }
  return out;
}

State graph_state(const GraphSpec& spec) {
  spec.validate();
  State s = basis_state(spec.num_qubits, 0);
  const Gate2 h = gates::hadamard<double>();
  for (int w = 0; w < spec.num_qubits; ++w) s = apply_single(s, h, w);
  for (auto [a, b] : spec.edges) s = apply_cz(s, a, b);
  return s;
}

State box_cluster() {
  // |ghz>_234 with H on qubits 2 and 4 (wires 0 and 2 of the 3-qubit block).
  const double r = 1.0 / std::sqrt(2.0);
  Ket<double> ghz = Ket<double>::Zero(8);
  ghz(0) = r;
  ghz(7) = r;
  State block(3, ghz);
  const Gate2 h = gates::hadamard<double>();
  block = apply_single(block, h, 0);
  block = apply_single(block, h, 2);
  State flipped = apply_single(apply_single(block, gates::pauli_z<double>(), 0),
                               gates::pauli_z<double>(), 2);

  // |0>_1 (x) block + |1>_1 (x) Z_2 Z_4 block. The closed form quotes a 1/4
  // prefactor, which does not normalize this sum; normalize instead.
  Ket<double> amps(16);
  amps.head(8) = block.amplitudes();
  amps.tail(8) = flipped.amplitudes();
  return State::normalized(4, std::move(amps));
}

State square_graph_box() { return graph_state({4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}}); }

GraphSpec wafer_graph() { return {6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}}}; }

State wafer_cluster() { return graph_state(wafer_graph()); }

Gate2 ImportOp::matrix() const {
  const std::complex<double> i(0, 1);
  switch (kind) {
    case Kind::identity: return gates::identity<double>();
    case Kind::i_sigma_x: return i * gates::pauli_x<double>();
    case Kind::sigma_z: return gates::pauli_z<double>();
    case Kind::rx: return gates::rx<double>(mu);
    case Kind::rz: return gates::rz<double>(mu);
  }
  throw std::logic_error("bad import kind");
}

std::string ImportOp::name() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::i_sigma_x: return "i_sigma_x";
    case Kind::sigma_z: return "sigma_z";
    case Kind::rx: return "rx";
    case Kind::rz: return "rz";
  }
  return "?";
}

int MeasurementPattern::num_qubits() const {
  switch (resource) {
    case Resource::box: return 4;
    case Resource::wafer: return 6;
    case Resource::graph:
      if (!graph) throw std::invalid_argument("graph pattern without a graph");
      return graph->num_qubits;
  }
  return 0;
}

void MeasurementPattern::validate() const {
  const int n = num_qubits();
  if (resource == Resource::graph) graph->validate();
  std::set<int> used;
  auto claim = [&](int w, const char* what) {
    if (w < 0 || w >= n) throw std::invalid_argument(std::string(what) + " wire out of range");
    if (!used.insert(w).second) {
      throw std::invalid_argument("wire " + std::to_string(w) + " used twice in pattern");
    }
  };
  for (const auto& m : measured) claim(m.wire, "measured");
  claim(output_wires[0], "output");
  claim(output_wires[1], "output");
  for (const auto& [w, op] : imports) {
    if (w != output_wires[0] && w != output_wires[1]) {
      throw std::invalid_argument("imports may only target output wires");
    }
  }
}

std::string ConventionConfig::describe() const {
  std::ostringstream s;
  s << "angle_sign=" << angle_sign_ << " swap_players=" << (swap_players_ ? "true" : "false")
    << " plus_label=" << static_cast<char>(plus_label_)
    << " import_side=" << (import_side_ == ImportSide::circuit ? "circuit" : "physical")
    << " wafer_layer_signs=(" << wafer_layer_signs_[0] << "," << wafer_layer_signs_[1] << ")";
  return s.str();
}

std::vector<ConventionConfig> convention_candidates() {
  std::vector<ConventionConfig> out;
  for (int sign : {1, -1}) {
    for (bool swap : {false, true}) {
      for (Move label : {Move::c, Move::d}) {
        for (ImportSide side : {ImportSide::physical, ImportSide::circuit}) {
          for (std::array<int, 2> layers : {std::array<int, 2>{1, 1}, std::array<int, 2>{1, -1},
                                            std::array<int, 2>{-1, 1},
                                            std::array<int, 2>{-1, -1}}) {
            ConventionConfig c;
            c.angle_sign_ = sign;
            c.swap_players_ = swap;
            c.plus_label_ = label;
            c.import_side_ = side;
            c.wafer_layer_signs_ = layers;
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

ConventionConfig convention_from_fields(int angle_sign, bool swap_players, Move plus_label,
                                        ImportSide import_side,
                                        std::array<int, 2> wafer_layer_signs) {
  auto unit = [](int s) { return s == 1 || s == -1; };
  if (!unit(angle_sign) || !unit(wafer_layer_signs[0]) || !unit(wafer_layer_signs[1])) {
    throw std::invalid_argument("convention signs must be +1 or -1");
  }
  if (plus_label != Move::c && plus_label != Move::d) {
    throw std::invalid_argument("plus_label must be c or d");
  }
  ConventionConfig c;
  c.angle_sign_ = angle_sign;
  c.swap_players_ = swap_players;
  c.plus_label_ = plus_label;
  c.import_side_ = import_side;
  c.wafer_layer_signs_ = wafer_layer_signs;
  return c;
}

const ClusterBackend& ClusterBackend::standard() {
  static const ClusterBackend backend{};
  return backend;
}

namespace {

const State& resource_state(const MeasurementPattern& p, const ClusterBackend& backend,
                            std::optional<State>& scratch) {
  switch (p.resource) {
    case Resource::box: return backend.box;
    case Resource::wafer: return backend.wafer;
    case Resource::graph: scratch = graph_state(*p.graph); return *scratch;
  }
  throw std::logic_error("bad resource");
}

}  // namespace

ClusterRunResult run_pattern(const MeasurementPattern& pattern, const ConventionConfig& conv,
                             const ClusterBackend& backend) {
  pattern.validate();
  std::optional<State> scratch;
  State s = resource_state(pattern, backend, scratch);
  if (s.num_qubits() != pattern.num_qubits()) {
    throw std::invalid_argument("resource size does not match pattern");
  }

  const std::complex<double> i(0, 1);
  const double r = 1.0 / std::sqrt(2.0);
  double postselection = 1.0;
  for (const auto& m : pattern.measured) {
    int sign = conv.angle_sign() * backend.measurement_phase_sign;
    if (pattern.resource == Resource::wafer) {
      if (m.layer < 0 || m.layer > 1) throw std::invalid_argument("wafer layer must be 0 or 1");
      sign *= conv.wafer_layer_signs()[static_cast<std::size_t>(m.layer)];
    }
    const double branch = m.keep_branch == Branch::plus ? 1.0 : -1.0;
    Spinor<double> v;
    v << r, branch * r * std::exp(i * (sign * m.angle));
    auto proj = project_onto(s, m.wire, v);
    s = std::move(proj.state);
    postselection *= proj.probability;
  }

  const Gate2 h = gates::hadamard<double>();
  for (const auto& [wire, op] : pattern.imports) {
    Gate2 g = op.matrix();
    if (conv.import_side() == ImportSide::circuit) g = h * g * h;
    s = apply_single(s, g, wire);
  }

  const int wire_a = pattern.output_wires[conv.swap_players() ? 1 : 0];
  const int wire_b = pattern.output_wires[conv.swap_players() ? 0 : 1];
  // sigma_x readout: rotate to the computational basis.
  s = apply_single(apply_single(s, h, wire_a), h, wire_b);
  const RVector<double> p = computational_distribution(s, {wire_a, wire_b});

  OutcomeDistribution dist{p(0), p(1), p(2), p(3)};
  if (conv.plus_label() == Move::d) dist = {p(3), p(2), p(1), p(0)};
  return {dist, postselection};
}

const std::vector<NamedRow>& named_rows() {
  static const std::vector<NamedRow> rows = [] {
    const ImportOp one = ImportOp::identity();
    const ImportOp ix = ImportOp::i_sigma_x();
    return std::vector<NamedRow>{
        {"c_A c_B", {Move::c, Move::c}, 0, 0, one, one},
        {"c_A q_B", {Move::c, Move::q}, 0, 0, one, ix},
        {"c_A d_B", {Move::c, Move::d}, 0, kPi, one, ix},
        {"q_A c_B", {Move::q, Move::c}, 0, 0, ix, one},
        {"q_A q_B", {Move::q, Move::q}, 0, 0, ix, ix},
        {"q_A d_B", {Move::q, Move::d}, 0, kPi, ix, ix},
        {"d_A c_B", {Move::d, Move::c}, kPi, 0, ix, one},
        {"d_A q_B", {Move::d, Move::q}, kPi, 0, ix, ix},
        {"d_A d_B", {Move::d, Move::d}, kPi, kPi, ix, ix},
        {"m_A m_B", {Move::m, Move::m}, kPi, kPi, one, one},
    };
  }();
  return rows;
}

namespace {

MeasurementPattern pattern_from_row(const NamedRow& row) {
  MeasurementPattern p;
  p.name = row.name;
  p.resource = Resource::box;
  // The table lists -a and -b; the basis angle is a.
  p.measured = {{0, -row.minus_a, Branch::plus, 0}, {3, -row.minus_b, Branch::plus, 0}};
  p.imports = {{1, row.import_a}, {2, row.import_b}};
  p.output_wires = {1, 2};
  return p;
}

std::optional<std::pair<Move, Move>> parse_row_name(std::string_view name) {
  std::string compact;
  for (char ch : name) {
    if (ch == 'c' || ch == 'd' || ch == 'q' || ch == 'm') compact.push_back(ch);
    else if (ch == '_' || ch == ' ' || ch == ',' || ch == '(' || ch == ')') continue;
    else if (ch == 'A' || ch == 'B') continue;
    else return std::nullopt;
  }
  if (compact.size() != 2) return std::nullopt;
  return std::pair{*parse_move(compact.substr(0, 1)), *parse_move(compact.substr(1, 1))};
}

}  // namespace

std::optional<NamedRow> find_named_row(const StrategyProfile& profile) {
  if (!profile.a.is_named() || !profile.b.is_named()) return std::nullopt;
  for (const auto& row : named_rows()) {
    if (row.profile == profile) return row;
  }
  return std::nullopt;
}

MeasurementPattern named_pattern(Move a, Move b) {
  auto row = find_named_row({a, b});
  if (!row) {
    throw std::invalid_argument(std::string("profile (") + static_cast<char>(a) + "," +
                                static_cast<char>(b) + ") has no named pattern");
  }
  return pattern_from_row(*row);
}

MeasurementPattern named_pattern(std::string_view name) {
  auto moves = parse_row_name(name);
  if (!moves) throw std::invalid_argument("unknown named pattern '" + std::string(name) + "'");
  return named_pattern(moves->first, moves->second);
}

MeasurementPattern quadrant_pattern(double mu, double nu) {
  for (double x : {mu, nu}) {
    if (!std::isfinite(x) || x < -1e-12 || x > kPi + 1e-12) {
      throw std::out_of_range("quadrant import angles must lie in [0, pi]");
    }
  }
  MeasurementPattern p;
  std::ostringstream name;
  name.precision(15);
  name << "quadrant(" << mu << "," << nu << ")";
  p.name = name.str();
  p.resource = Resource::box;
  p.measured = {{0, 0.0, Branch::plus, 0}, {3, 0.0, Branch::plus, 0}};
  p.imports = {{1, ImportOp::rx(mu)}, {2, ImportOp::rx(nu)}};
  p.output_wires = {1, 2};
  return p;
}

MeasurementPattern wafer_pattern(double theta_a, double theta_b) {
  for (double x : {theta_a, theta_b}) {
    if (!std::isfinite(x) || x < -1e-12 || x > kPi + 1e-12) {
      throw std::out_of_range("wafer angles must lie in [0, pi]");
    }
  }
  const double alpha = kPi / 2;
  const double beta = kPi / 2;
  MeasurementPattern p;
  std::ostringstream name;
  name.precision(15);
  name << "wafer(" << theta_a << "," << theta_b << ")";
  p.name = name.str();
  p.resource = Resource::wafer;
  p.measured = {{0, alpha, Branch::plus, 0},
                {1, theta_a, Branch::plus, 1},
                {5, beta, Branch::plus, 0},
                {4, theta_b, Branch::plus, 1}};
  p.imports = {{2, ImportOp::rx(kPi / 2)}, {3, ImportOp::rx(kPi / 2)}};
  p.output_wires = {2, 3};
  return p;
}

OutcomeDistribution circuit_oracle(const StrategyProfile& profile) {
  return outcome_distribution(profile, GameVariant::entangled);
}

const std::vector<double>& wafer_calibration_thetas() {
  static const std::vector<double> thetas{0.0, kPi / 5, kPi / 2, 3 * kPi / 4, kPi};
  return thetas;
}

CalibrationReport evaluate_convention(const ConventionConfig& conv, const CircuitOracle& oracle,
                                      const ClusterBackend& backend) {
  CalibrationReport report;
  report.candidates = 1;
  report.selected = conv;
  double worst = 0;
  auto check = [&](const MeasurementPattern& pattern, const StrategyProfile& profile) {
    PatternCheck c;
    c.name = pattern.name;
    try {
      const ClusterRunResult run = run_pattern(pattern, conv, backend);
      c.tv = total_variation(run.distribution, oracle(profile));
      c.postselection_probability = run.postselection_probability;
    } catch (const ImpossiblePostselection&) {
      c.tv = 1.0;
      c.postselection_probability = 0.0;
    }
    worst = std::max(worst, c.tv);
    return c;
  };
  for (const auto& row : named_rows()) {
    report.patterns.push_back(check(pattern_from_row(row), row.profile));
  }
  for (double ta : wafer_calibration_thetas()) {
    for (double tb : wafer_calibration_thetas()) {
      report.wafer.push_back(check(wafer_pattern(ta, tb),
                                   {Strategy::parametric(ta, 0), Strategy::parametric(tb, 0)}));
    }
  }
  report.max_tv_deviation = worst;
  report.matched = worst <= kEquivalenceTolerance ? 1 : 0;
  return report;
}

CalibrationReport calibrate(const CircuitOracle& oracle, const ClusterBackend& backend) {
  const std::vector<ConventionConfig> candidates = convention_candidates();
  std::optional<CalibrationReport> first;
  int matched = 0;
  std::optional<CalibrationReport> best;
  for (const auto& conv : candidates) {
    CalibrationReport r = evaluate_convention(conv, oracle, backend);
    if (r.matched) {
      ++matched;
      if (!first) first = r;
    }
    if (!best || r.max_tv_deviation < best->max_tv_deviation) best = r;
  }
  if (!first) {
    std::string worst_name;
    double worst_tv = -1;
    for (const auto* list : {&best->patterns, &best->wafer}) {
      for (const auto& c : *list) {
        if (c.tv > worst_tv) {
          worst_tv = c.tv;
          worst_name = c.name;
        }
      }
    }
    std::ostringstream msg;
    msg << "calibration failed: no convention matches the circuit oracle; best "
        << best->selected->describe() << " with max TV deviation " << best->max_tv_deviation
        << " (worst pattern: " << worst_name << ")";
    throw CalibrationFailure(msg.str(), *best->selected, best->max_tv_deviation, worst_name);
  }
  first->matched = matched;
  first->candidates = static_cast<int>(candidates.size());
  return *first;
}

}  // namespace qpd
