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

// Measurement-based backends for the game.
//
// A cluster resource is measured qubit by qubit in bases
// {|0> +- e^{i a}|1>}/sqrt(2); only the "+" branch is kept (postselection), so
// no byproduct corrections are applied. The two surviving output qubits get
// their imported single-qubit operations and are then read out in the sigma_x
// eigenbasis.
//
// Box resource (wires 0..3 hold physical qubits 1..4): the player-A angle is
// measured on wire 0, player B on wire 3, and wires 1 and 2 are the outputs.
//
// Wafer resource: a six-qubit ring 0-1-2-3-4-5-0. Player A's chain is
// 0 (first layer), 1 (second layer), 2 (output); player B's is 5, 4, 3.

#ifndef QPD_CLUSTER_HPP_
#define QPD_CLUSTER_HPP_

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qpd/game.hpp"

namespace qpd {

struct GraphSpec {
  int num_qubits = 1;
  std::vector<std::pair<int, int>> edges;

  // Throws std::invalid_argument on self-loops, duplicates or bad indices.
  void validate() const;
  std::vector<int> neighbors(int vertex) const;
};

// |+>^n followed by CZ on every edge.
State graph_state(const GraphSpec& spec);

// The four-qubit box resource built from its closed form
// [|0>_1 + |1>_1 (Z_2 Z_4)] (H_2 H_4) |ghz>_234, normalized.
State box_cluster();
// The 4-cycle graph state 1-2-3-4-1. Equal to box_cluster() here, but kept
// separate since nothing requires the two constructions to agree.
State square_graph_box();

GraphSpec wafer_graph();
State wafer_cluster();

enum class Branch { plus, minus };

struct MeasuredQubitSpec {
  int wire = 0;
  double angle = 0;  // radians; basis (|0> +- e^{i angle}|1>)/sqrt(2)
  Branch keep_branch = Branch::plus;
  int layer = 0;     // position along the player's measurement chain
};

struct ImportOp {
  enum class Kind { identity, i_sigma_x, sigma_z, rx, rz };
  Kind kind = Kind::identity;
  double mu = 0;  // only for rx / rz

  static ImportOp identity() { return {}; }
  static ImportOp i_sigma_x() { return {Kind::i_sigma_x, 0}; }
  static ImportOp sigma_z() { return {Kind::sigma_z, 0}; }
  static ImportOp rx(double mu) { return {Kind::rx, mu}; }
  static ImportOp rz(double mu) { return {Kind::rz, mu}; }

  Gate2 matrix() const;
  std::string name() const;  // "identity", "i_sigma_x", "sigma_z", "rx", "rz"
};

enum class Resource { box, wafer, graph };

struct MeasurementPattern {
  std::string name;
  Resource resource = Resource::box;
  std::optional<GraphSpec> graph;  // set iff resource == graph
  std::vector<MeasuredQubitSpec> measured;
  std::map<int, ImportOp> imports;  // keyed by output wire
  std::array<int, 2> output_wires{1, 2};

  int num_qubits() const;
  void validate() const;
};

struct ClusterRunResult {
  OutcomeDistribution distribution;
  double postselection_probability = 0;
};

// Where an imported operation acts relative to the readout Hadamard. `circuit`
// places it after H (the circuit picture; physically H A H is applied before
// the sigma_x readout). `physical` applies A as-is before the readout.
enum class ImportSide { physical, circuit };

// Resolves the sign and labeling freedoms of the cluster backends. Only the
// calibration search (or a calibration file it wrote) creates these.
class ConventionConfig {
 public:
  int angle_sign() const { return angle_sign_; }
  bool swap_players() const { return swap_players_; }
  Move plus_label() const { return plus_label_; }
  ImportSide import_side() const { return import_side_; }
  const std::array<int, 2>& wafer_layer_signs() const { return wafer_layer_signs_; }

  std::string describe() const;
  bool operator==(const ConventionConfig&) const = default;

 private:
  ConventionConfig() = default;
  friend std::vector<ConventionConfig> convention_candidates();
  friend ConventionConfig convention_from_fields(int, bool, Move, ImportSide,
                                                 std::array<int, 2>);

  int angle_sign_ = 1;
  bool swap_players_ = false;
  Move plus_label_ = Move::c;
  ImportSide import_side_ = ImportSide::circuit;
  std::array<int, 2> wafer_layer_signs_{1, 1};
};

// All 64 candidates in search order: angle_sign (+1, -1), then swap_players
// (false, true), then plus_label (c, d), then import_side (physical,
// circuit), then wafer_layer_signs ((+,+), (+,-), (-,+), (-,-)).
std::vector<ConventionConfig> convention_candidates();
// Used by the calibration-file reader; validates every field.
ConventionConfig convention_from_fields(int angle_sign, bool swap_players, Move plus_label,
                                        ImportSide import_side,
                                        std::array<int, 2> wafer_layer_signs);

// The physical resources a pattern runs on. Tests swap in broken ones.
struct ClusterBackend {
  State box = box_cluster();
  State wafer = wafer_cluster();
  // -1 models a measurement stage whose basis phase runs backwards.
  int measurement_phase_sign = 1;

  static const ClusterBackend& standard();
};

// Throws ImpossiblePostselection if a kept branch has probability < 1e-12.
ClusterRunResult run_pattern(const MeasurementPattern& pattern, const ConventionConfig& conv,
                             const ClusterBackend& backend = ClusterBackend::standard());

struct NamedRow {
  std::string name;  // e.g. "c_A c_B"
  StrategyProfile profile;
  double minus_a = 0;
  double minus_b = 0;
  ImportOp import_a;
  ImportOp import_b;
};

const std::vector<NamedRow>& named_rows();
// Accepts "c_A c_B", "cc" or "c,c".
MeasurementPattern named_pattern(std::string_view name);
MeasurementPattern named_pattern(Move a, Move b);
std::optional<NamedRow> find_named_row(const StrategyProfile& profile);

// a = b = 0 with imports rx(mu), rx(nu); mu, nu in [0, pi].
MeasurementPattern quadrant_pattern(double mu, double nu);
// The phi reached by quadrant import angle mu under the tested hypothesis.
inline double quadrant_phi(double mu) { return mu / 2; }

// alpha = beta = pi/2, gamma = theta_a, delta = theta_b, imports rx(pi/2).
MeasurementPattern wafer_pattern(double theta_a, double theta_b);

using CircuitOracle = std::function<OutcomeDistribution(const StrategyProfile&)>;
// The entangled circuit-model game.
OutcomeDistribution circuit_oracle(const StrategyProfile& profile);

struct PatternCheck {
  std::string name;
  double tv = 0;
  double postselection_probability = 0;
};

struct CalibrationReport {
  int matched = 0;
  int candidates = 0;
  std::optional<ConventionConfig> selected;
  double max_tv_deviation = 0;  // over all checks, for the selected config
  std::vector<PatternCheck> patterns;
  std::vector<PatternCheck> wafer;
};

class CalibrationFailure : public std::runtime_error {
 public:
  CalibrationFailure(const std::string& what, ConventionConfig best, double deviation,
                     std::string worst_check)
      : std::runtime_error(what),
        best_(best),
        deviation_(deviation),
        worst_check_(std::move(worst_check)) {}
  const ConventionConfig& best() const { return best_; }
  double deviation() const { return deviation_; }
  const std::string& worst_check() const { return worst_check_; }

 private:
  ConventionConfig best_;
  double deviation_;
  std::string worst_check_;
};

inline constexpr double kEquivalenceTolerance = 1e-9;

// theta values for the wafer part of the calibration.
const std::vector<double>& wafer_calibration_thetas();

// Evaluates every named-profile pattern and a wafer theta grid for one convention.
CalibrationReport evaluate_convention(const ConventionConfig& conv, const CircuitOracle& oracle,
                                      const ClusterBackend& backend = ClusterBackend::standard());

// Exhaustive search of convention_candidates(); returns the first candidate
// under which every check is within kEquivalenceTolerance. Throws
// CalibrationFailure when none matches.
CalibrationReport calibrate(const CircuitOracle& oracle = circuit_oracle,
                            const ClusterBackend& backend = ClusterBackend::standard());

}  // namespace qpd

#endif  // QPD_CLUSTER_HPP_
