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

// Imperfect play: Gaussian strategy-angle noise and mixed game inputs.

#ifndef QPD_NOISE_HPP_
#define QPD_NOISE_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "qpd/game.hpp"

namespace qpd {

enum class NoiseMethod { monte_carlo, quadrature };

struct NoiseConfig {
  double sigma = 0;
  // Per-parameter overrides; default to sigma.
  std::optional<double> sigma_theta;
  std::optional<double> sigma_phi;
  int num_samples = 32;  // Monte Carlo draws, or Gauss-Hermite nodes per dimension
  std::uint64_t seed = 0;
  NoiseMethod method = NoiseMethod::quadrature;
  int workers = 1;  // Monte Carlo threads; results do not depend on this

  double theta_sigma() const { return sigma_theta.value_or(sigma); }
  double phi_sigma() const { return sigma_phi.value_or(sigma); }
  void validate() const;
};

struct NoisyResult {
  double sigma = 0;
  double mean_payoff_a = 0;
  double mean_payoff_b = 0;
  double std_error_a = 0;
  double std_error_b = 0;
  double negativity_of_resource = 0;
};

// Gauss-Hermite rule for a standard normal: E[f(Z)] ~ sum w_k f(x_k).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1
};
GaussHermite gauss_hermite_normal(int count);

// Independent eps ~ N(0, sigma^2) added to theta and phi of each player
// (four normals). The named strategy m has no angles and is rejected.
NoisyResult noisy_payoffs(const StrategyProfile& profile, const NoiseConfig& cfg,
                          GameVariant variant = GameVariant::entangled);

struct GapPoint {
  double sigma = 0;
  double gap_a = 0;  // ideal payoff_a minus the noisy mean
  double stderr_a = 0;
  double negativity = 0;
};

// `sigmas` must be ascending. Each entry replaces cfg.sigma; a sigma_theta or
// sigma_phi override stays pinned (set sigma_phi = 0 for theta-only noise).
std::vector<GapPoint> payoff_gap_curve(const std::vector<double>& sigmas,
                                       const StrategyProfile& profile, const NoiseConfig& cfg);

// rho(sigma) = E[(R_y(e_A) x R_y(e_B)) P|cc><cc|P^dag (.)^dag], e ~ N(0, sigma^2),
// by Gauss-Hermite quadrature.
Density corrupted_resource(double sigma, int nodes = 32);

struct MixedInputResult {
  OutcomeDistribution distribution;
  Payoffs payoffs;
  Density resource;  // the input after the variant's preparation stage
};

// Input (x)_j [(1-x)|c><c| + x|d><d|], x in [0, 0.5].
Density mixed_input(double x);
MixedInputResult mixed_input_game(double x, const StrategyProfile& profile,
                                  GameVariant variant = GameVariant::entangled);

// Smallest x whose post-P resource is PPT, by bisection to `tol`. The
// minimum eigenvalue of the partial transpose is first checked for
// monotonicity on a 51-point grid; throws std::runtime_error otherwise.
double separability_threshold(double tol = 1e-4);

struct MixedParetoReport {
  double x = 0;
  int steps = 0;
  int profiles_reaching_cp = 0;  // both payoffs >= 3 (within 1e-9)
  double max_symmetric_payoff = 0;  // max over p of payoff_a(p, p)
  double argmax_p = 0;
  double max_min_payoff = 0;  // max over the grid of min(payoff_a, payoff_b)
  bool resource_separable = false;
};

MixedParetoReport pareto_scan_mixed(double x, int steps);

}  // namespace qpd

#endif  // QPD_NOISE_HPP_
