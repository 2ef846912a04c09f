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

#include "qpd/game.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qpd {

namespace {

constexpr double kAngleSlack = 1e-12;

void check_range(double value, double lo, double hi, const char* what) {
  if (!std::isfinite(value) || value < lo - kAngleSlack || value > hi + kAngleSlack) {
    std::ostringstream msg;
    msg << what << " = " << value << " outside [" << lo << ", " << hi << "]";
    throw std::out_of_range(msg.str());
  }
}

Matrix4c kron2(const Gate2& a, const Gate2& b) { return kron(a, b); }

Matrix4c cz_matrix() {
  Matrix4c m = Matrix4c::Identity();
  m(3, 3) = -1;
  return m;
}

Matrix4c hh_matrix() {
  const Gate2 h = gates::hadamard<double>();
  return kron2(h, h);
}

}  // namespace

Strategy Strategy::parametric(double theta, double phi) {
  check_range(theta, 0.0, kPi, "theta");
  check_range(phi, 0.0, kPi / 2, "phi");
  return Strategy(Angles{std::clamp(theta, 0.0, kPi), std::clamp(phi, 0.0, kPi / 2)});
}

Strategy Strategy::from_p(double p) {
  check_range(p, -1.0, 1.0, "p");
  p = std::clamp(p, -1.0, 1.0);
  if (p >= 0) return parametric(p * kPi, 0.0);
  return parametric(0.0, -p * kPi / 2);
}

Strategy p_to_strategy(double p) { return Strategy::from_p(p); }

std::optional<Angles> Strategy::resolve_angles() const {
  if (!is_named()) return angles();
  switch (move()) {
    case Move::c: return Angles{0, 0};
    case Move::d: return Angles{kPi, 0};
    case Move::q: return Angles{0, kPi / 2};
    case Move::m: return std::nullopt;
  }
  return std::nullopt;
}

std::string Strategy::label() const {
  if (is_named()) return std::string(1, static_cast<char>(move()));
  std::ostringstream s;
  s.precision(15);
  s << "U(" << angles().theta << "," << angles().phi << ")";
  return s.str();
}

std::string_view to_string(GameVariant v) {
  switch (v) {
    case GameVariant::entangled: return "entangled";
    case GameVariant::separable: return "separable";
    case GameVariant::classical_limit: return "classical_limit";
  }
  return "?";
}

GameVariant parse_variant(std::string_view name) {
  if (name == "entangled") return GameVariant::entangled;
  if (name == "separable") return GameVariant::separable;
  if (name == "classical_limit" || name == "classical") return GameVariant::classical_limit;
  throw std::invalid_argument("unknown game variant '" + std::string(name) + "'");
}

std::optional<Move> parse_move(std::string_view name) {
  if (name == "c") return Move::c;
  if (name == "d") return Move::d;
  if (name == "q") return Move::q;
  if (name == "m") return Move::m;
  return std::nullopt;
}

OutcomeDistribution OutcomeDistribution::from_array(const std::array<double, 4>& p) {
  return {p[0], p[1], p[2], p[3]};
}

Gate2 strategy_unitary(double theta, double phi) {
  const std::complex<double> i(0, 1);
  Gate2 u;
  u << std::exp(-i * phi) * std::cos(theta / 2), -std::sin(theta / 2),
      std::sin(theta / 2), std::exp(i * phi) * std::cos(theta / 2);
  return u;
}

Gate2 strategy_matrix(const Strategy& s) {
  if (s.is_named() && s.move() == Move::m) {
    const double r = 1.0 / std::sqrt(2.0);
    const std::complex<double> i(0, 1);
    return r * (Gate2::Identity() + i * gates::pauli_y<double>());
  }
  const Angles a = *s.resolve_angles();
  return strategy_unitary(a.theta, a.phi);
}

Matrix4c preparation_stage(GameVariant variant) {
  switch (variant) {
    case GameVariant::entangled: return cz_matrix() * hh_matrix();
    case GameVariant::separable: return hh_matrix();
    case GameVariant::classical_limit: return Matrix4c::Identity();
  }
  throw std::logic_error("bad variant");
}

namespace {

Matrix4c readout_stage(GameVariant variant) {
  switch (variant) {
    case GameVariant::entangled: return hh_matrix() * cz_matrix();
    case GameVariant::separable: return hh_matrix();
    case GameVariant::classical_limit: return Matrix4c::Identity();
  }
  throw std::logic_error("bad variant");
}

void check_two_qubits(int n) {
  if (n != 2) throw std::invalid_argument("the game acts on exactly 2 qubits");
}

}  // namespace

Matrix4c circuit_unitary(const Gate2& ua, const Gate2& ub, GameVariant variant) {
  return readout_stage(variant) * kron2(ua, ub) * preparation_stage(variant);
}

Matrix4c circuit_unitary(const StrategyProfile& profile, GameVariant variant) {
  return circuit_unitary(strategy_matrix(profile.a), strategy_matrix(profile.b), variant);
}

State evolve(const StrategyProfile& profile, GameVariant variant, const State& input) {
  check_two_qubits(input.num_qubits());
  const Gate2 h = gates::hadamard<double>();
  const bool stages = variant != GameVariant::classical_limit;
  const bool entangling = variant == GameVariant::entangled;
  State s = input;
  if (stages) {
    s = apply_single(s, h, 0);
    s = apply_single(s, h, 1);
    if (entangling) s = apply_cz(s, 0, 1);
  }
  s = apply_single(s, strategy_matrix(profile.a), 0);
  s = apply_single(s, strategy_matrix(profile.b), 1);
  if (stages) {
    if (entangling) s = apply_cz(s, 0, 1);
    s = apply_single(s, h, 0);
    s = apply_single(s, h, 1);
  }
  return s;
}

Density evolve(const StrategyProfile& profile, GameVariant variant, const Density& input) {
  check_two_qubits(input.num_qubits());
  return conjugate(input, circuit_unitary(profile, variant));
}

namespace {

OutcomeDistribution from_probabilities(const RVector<double>& p) {
  return {p(0), p(1), p(2), p(3)};
}

}  // namespace

OutcomeDistribution outcome_distribution(const StrategyProfile& profile,
                                         GameVariant variant, const State& input) {
  return from_probabilities(computational_distribution(evolve(profile, variant, input), {0, 1}));
}

OutcomeDistribution outcome_distribution(const StrategyProfile& profile,
                                         GameVariant variant) {
  return outcome_distribution(profile, variant, basis_state(2, 0));
}

OutcomeDistribution outcome_distribution(const StrategyProfile& profile,
                                         GameVariant variant, const Density& input) {
  return from_probabilities(diagonal_probabilities(evolve(profile, variant, input)));
}

OutcomeDistribution outcome_distribution(const Gate2& ua, const Gate2& ub,
                                         GameVariant variant) {
  // First column of the circuit unitary is its image of |00>.
  const Matrix4c u = circuit_unitary(ua, ub, variant);
  return {std::norm(u(0, 0)), std::norm(u(1, 0)), std::norm(u(2, 0)), std::norm(u(3, 0))};
}

Payoffs payoffs(const OutcomeDistribution& d) {
  return {3 * d.p_cc + d.p_dd + 5 * d.p_dc, 3 * d.p_cc + d.p_dd + 5 * d.p_cd};
}

double total_variation(const OutcomeDistribution& x, const OutcomeDistribution& y) {
  return 0.5 * (std::abs(x.p_cc - y.p_cc) + std::abs(x.p_cd - y.p_cd) +
                std::abs(x.p_dc - y.p_dc) + std::abs(x.p_dd - y.p_dd));
}

std::vector<double> p_grid(int steps, double lo, double hi) {
  if (steps < 2) throw std::invalid_argument("grid needs at least 2 steps");
  if (!(lo < hi)) throw std::invalid_argument("grid bounds must satisfy lo < hi");
  std::vector<double> ps(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    ps[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (steps - 1);
  }
  ps.back() = hi;
  return ps;
}

PayoffTable payoff_table(const std::vector<Strategy>& a, const std::vector<Strategy>& b,
                         GameVariant variant) {
  PayoffTable t;
  t.a_strategies = a;
  t.b_strategies = b;
  t.cells.resize(a.size() * b.size());
  std::vector<Gate2> ua, ub;
  for (const auto& s : a) ua.push_back(strategy_matrix(s));
  for (const auto& s : b) ub.push_back(strategy_matrix(s));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      t.at(i, j) = payoffs(outcome_distribution(ua[i], ub[j], variant));
    }
  }
  return t;
}

PayoffTable payoff_surface(int steps, GameVariant variant, double lo, double hi) {
  const std::vector<double> ps = p_grid(steps, lo, hi);
  std::vector<Strategy> strategies;
  strategies.reserve(ps.size());
  for (double p : ps) strategies.push_back(Strategy::from_p(p));
  PayoffTable t = payoff_table(strategies, strategies, variant);
  t.a_params = ps;
  t.b_params = ps;
  return t;
}

std::vector<GridPoint> find_nash(const PayoffTable& table, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
  std::vector<double> best_a(table.cols(), -1e300);  // per column j, A's best reply
  std::vector<double> best_b(table.rows(), -1e300);  // per row i, B's best reply
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) {
      best_a[j] = std::max(best_a[j], table.at(i, j).a);
      best_b[i] = std::max(best_b[i], table.at(i, j).b);
    }
  }
  std::vector<GridPoint> out;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) {
      const Payoffs& p = table.at(i, j);
      if (best_a[j] - p.a <= tol && best_b[i] - p.b <= tol) out.push_back({i, j, p});
    }
  }
  return out;
}

std::vector<GridPoint> find_nash(int steps, GameVariant variant, double tol, double lo) {
  if (steps < 3) throw std::invalid_argument("find_nash needs steps >= 3");
  return find_nash(payoff_surface(steps, variant, lo), tol);
}

std::vector<GridPoint> pareto_dominators(const PayoffTable& table, const Payoffs& ref,
                                         double tol) {
  std::vector<GridPoint> out;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) {
      const Payoffs& p = table.at(i, j);
      const bool weakly = p.a >= ref.a - tol && p.b >= ref.b - tol;
      const bool strictly = p.a > ref.a + tol || p.b > ref.b + tol;
      if (weakly && strictly) out.push_back({i, j, p});
    }
  }
  return out;
}

std::vector<GridPoint> pareto_dominators(const StrategyProfile& profile, int steps,
                                         GameVariant variant, double lo) {
  if (steps < 3) throw std::invalid_argument("pareto_dominators needs steps >= 3");
  const Payoffs ref = payoffs(outcome_distribution(profile, variant));
  return pareto_dominators(payoff_surface(steps, variant, lo), ref);
}

BestResponse best_response(const Strategy& opponent, int steps, GameVariant variant,
                           double lo, double tol) {
  if (steps < 3) throw std::invalid_argument("best_response needs steps >= 3");
  const std::vector<double> ps = p_grid(steps, lo, 1.0);
  const Gate2 ub = strategy_matrix(opponent);
  std::vector<double> values(ps.size());
  for (std::size_t k = 0; k < ps.size(); ++k) {
    values[k] = payoffs(outcome_distribution(strategy_matrix(Strategy::from_p(ps[k])), ub,
                                             variant)).a;
  }
  const double top = *std::max_element(values.begin(), values.end());
  BestResponse best;
  for (std::size_t k = ps.size(); k-- > 0;) {
    if (values[k] >= top - tol) {
      best = {ps[k], Strategy::from_p(ps[k]), values[k]};
      break;
    }
  }
  return best;
}

std::vector<int> sample_outcomes(const OutcomeDistribution& dist, int shots,
                                 std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  const std::array<double, 4> w = dist.as_array();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double total = dist.sum();
  std::vector<int> out(static_cast<std::size_t>(shots));
  for (auto& o : out) {
    double u = uniform(rng) * total;
    int k = 0;
    while (k < 3 && u >= w[static_cast<std::size_t>(k)]) {
      u -= w[static_cast<std::size_t>(k)];
      ++k;
    }
    // Skip zero-probability tails left behind by roundoff.
    while (k > 0 && w[static_cast<std::size_t>(k)] <= 0) --k;
    o = k;
  }
  return out;
}

std::string_view outcome_label(int k) {
  static constexpr std::string_view kLabels[] = {"cc", "cd", "dc", "dd"};
  if (k < 0 || k > 3) throw std::out_of_range("outcome index");
  return kLabels[k];
}

}  // namespace qpd
