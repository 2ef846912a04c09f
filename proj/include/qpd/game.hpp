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

// The circuit-model quantum Prisoners' Dilemma.
//
// Two qubits start in |c,c> = |00>, pass an entangling stage
// P = CZ (H x H), the local strategies U_A x U_B, and a readout stage
// M = (H x H) CZ. Qubit 0 belongs to player A, qubit 1 to player B.

#ifndef QPD_GAME_HPP_
#define QPD_GAME_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qpd/qsim.hpp"

namespace qpd {

using Gate2 = Gate<double>;
using Matrix4c = Eigen::Matrix<std::complex<double>, 4, 4>;
using State = PureState<double>;
using Density = DensityMatrix<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Named moves. c = U(0,0), d = U(pi,0), q = U(0,pi/2) and m = (1 + i sigma_y)/sqrt(2),
// the last of which sits outside the two-parameter family.
enum class Move : char { c = 'c', d = 'd', q = 'q', m = 'm' };

struct Angles {
  double theta = 0;  // [0, pi]
  double phi = 0;    // [0, pi/2]
  bool operator==(const Angles&) const = default;
};

class Strategy {
 public:
  Strategy(Move move) : value_(move) {}  // NOLINT: implicit by design of call sites
  static Strategy parametric(double theta, double phi);
  // Scalar parameterization, p in [-1, 1]:
  // p >= 0 -> U(p pi, 0), p < 0 -> U(0, -p pi / 2).
  static Strategy from_p(double p);

  bool is_named() const { return std::holds_alternative<Move>(value_); }
  Move move() const { return std::get<Move>(value_); }
  Angles angles() const { return std::get<Angles>(value_); }
  // (theta, phi) for everything except m.
  std::optional<Angles> resolve_angles() const;
  std::string label() const;

  bool operator==(const Strategy&) const = default;

 private:
  explicit Strategy(Angles a) : value_(a) {}
  std::variant<Move, Angles> value_;
};

Strategy p_to_strategy(double p);

struct StrategyProfile {
  Strategy a;
  Strategy b;
  bool operator==(const StrategyProfile&) const = default;
};

enum class GameVariant { entangled, separable, classical_limit };

std::string_view to_string(GameVariant v);
GameVariant parse_variant(std::string_view name);
std::optional<Move> parse_move(std::string_view name);

struct OutcomeDistribution {
  double p_cc = 0;
  double p_cd = 0;
  double p_dc = 0;
  double p_dd = 0;

  std::array<double, 4> as_array() const { return {p_cc, p_cd, p_dc, p_dd}; }
  static OutcomeDistribution from_array(const std::array<double, 4>& p);
  double sum() const { return p_cc + p_cd + p_dc + p_dd; }
};

struct Payoffs {
  double a = 0;
  double b = 0;
};

// U(theta, phi) without range checks; noise sampling perturbs past the edges.
Gate2 strategy_unitary(double theta, double phi);
Gate2 strategy_matrix(const Strategy& s);

// Full two-qubit operator of the variant circuit.
Matrix4c circuit_unitary(const StrategyProfile& profile, GameVariant variant);
Matrix4c circuit_unitary(const Gate2& ua, const Gate2& ub, GameVariant variant);
// The stage applied before the strategies (P for entangled, H x H for
// separable, identity for the classical limit).
Matrix4c preparation_stage(GameVariant variant);

State evolve(const StrategyProfile& profile, GameVariant variant, const State& input);
Density evolve(const StrategyProfile& profile, GameVariant variant, const Density& input);

OutcomeDistribution outcome_distribution(const StrategyProfile& profile,
                                         GameVariant variant);
OutcomeDistribution outcome_distribution(const StrategyProfile& profile,
                                         GameVariant variant, const State& input);
OutcomeDistribution outcome_distribution(const StrategyProfile& profile,
                                         GameVariant variant, const Density& input);
OutcomeDistribution outcome_distribution(const Gate2& ua, const Gate2& ub,
                                         GameVariant variant);

Payoffs payoffs(const OutcomeDistribution& dist);

double total_variation(const OutcomeDistribution& x, const OutcomeDistribution& y);

// ---------------------------------------------------------------------------
// Grids and equilibrium analysis

// Uniform grid of p values, lo..hi inclusive.
std::vector<double> p_grid(int steps, double lo = -1.0, double hi = 1.0);

// Payoffs for every (row strategy for A, column strategy for B) pair.
struct PayoffTable {
  std::vector<Strategy> a_strategies;
  std::vector<Strategy> b_strategies;
  std::vector<double> a_params;  // p values when built from a p-grid
  std::vector<double> b_params;
  std::vector<Payoffs> cells;    // row-major: index = i * cols + j

  std::size_t rows() const { return a_strategies.size(); }
  std::size_t cols() const { return b_strategies.size(); }
  const Payoffs& at(std::size_t i, std::size_t j) const { return cells[i * cols() + j]; }
  Payoffs& at(std::size_t i, std::size_t j) { return cells[i * cols() + j]; }
};

PayoffTable payoff_table(const std::vector<Strategy>& a, const std::vector<Strategy>& b,
                         GameVariant variant);
PayoffTable payoff_surface(int steps, GameVariant variant, double lo = -1.0, double hi = 1.0);

struct GridPoint {
  std::size_t i = 0;
  std::size_t j = 0;
  Payoffs payoffs;
};

// Cells from which no unilateral grid deviation gains more than tol.
std::vector<GridPoint> find_nash(const PayoffTable& table, double tol = 1e-9);
std::vector<GridPoint> find_nash(int steps, GameVariant variant, double tol = 1e-9,
                                 double lo = -1.0);

// Cells weakly better for both players than `reference` and strictly better
// for at least one.
std::vector<GridPoint> pareto_dominators(const PayoffTable& table, const Payoffs& reference,
                                         double tol = 1e-9);
std::vector<GridPoint> pareto_dominators(const StrategyProfile& profile, int steps,
                                         GameVariant variant, double lo = -1.0);

struct BestResponse {
  double p = 0;
  Strategy strategy = Move::c;
  double payoff = 0;
};

// Best reply of player A to `opponent` over the p-grid. Ties go to the
// largest p.
BestResponse best_response(const Strategy& opponent, int steps, GameVariant variant,
                           double lo = -1.0, double tol = 1e-9);

// Shot sampling from an outcome distribution; outcome k indexes cc, cd, dc, dd.
std::vector<int> sample_outcomes(const OutcomeDistribution& dist, int shots,
                                 std::uint64_t seed);
std::string_view outcome_label(int k);

}  // namespace qpd

#endif  // QPD_GAME_HPP_
