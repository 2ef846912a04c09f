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

#include "qpd/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace qpd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream for sample i depends only on (seed, i).
std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index));
}

struct WeightedGate {
  double weight;
  Gate2 u;
};

// Amplitudes of readout * (ua x ub) * prepared, with `prepared` stored as a
// 2x2 matrix (row = qubit A, column = qubit B).
class FastGame {
 public:
  explicit FastGame(GameVariant variant) : readout_(readout(variant)) {
    const Eigen::Vector4cd prepared = preparation_stage(variant).col(0);
    prepared_ << prepared(0), prepared(1), prepared(2), prepared(3);
  }

  Payoffs operator()(const Gate2& ua, const Gate2& ub) const {
    const Gate2 m = ua * prepared_ * ub.transpose();
    const Eigen::Vector4cd v(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
    const Eigen::Vector4cd out = readout_ * v;
    return payoffs({std::norm(out(0)), std::norm(out(1)), std::norm(out(2)), std::norm(out(3))});
  }

 private:
  static Matrix4c readout(GameVariant variant) {
    // circuit_unitary(I, I) = readout * preparation.
    return circuit_unitary(Gate2::Identity(), Gate2::Identity(), variant) *
           preparation_stage(variant).adjoint();
  }

  Matrix4c readout_;
  Gate2 prepared_;
};

Angles angles_or_throw(const Strategy& s) {
  auto a = s.resolve_angles();
  if (!a) throw std::invalid_argument("strategy m has no (theta, phi) angles to perturb");
  return *a;
}

std::vector<WeightedGate> perturbed_gates(const Angles& a, double sigma_theta,
                                          double sigma_phi, int nodes) {
  const GaussHermite gh = gauss_hermite_normal(nodes);
  const GaussHermite point{{0.0}, {1.0}};
  const GaussHermite& gt = sigma_theta > 0 ? gh : point;
  const GaussHermite& gp = sigma_phi > 0 ? gh : point;
  std::vector<WeightedGate> out;
  out.reserve(gt.nodes.size() * gp.nodes.size());
  for (std::size_t i = 0; i < gt.nodes.size(); ++i) {
    for (std::size_t k = 0; k < gp.nodes.size(); ++k) {
      out.push_back({gt.weights[i] * gp.weights[k],
                     strategy_unitary(a.theta + sigma_theta * gt.nodes[i],
                                      a.phi + sigma_phi * gp.nodes[k])});
    }
  }
  return out;
}

void check_x(double x) {
  if (!std::isfinite(x) || x < 0 || x > 0.5) {
    throw std::out_of_range("mixedness x must lie in [0, 0.5]");
  }
}

}  // namespace

void NoiseConfig::validate() const {
  for (double s : {sigma, theta_sigma(), phi_sigma()}) {
    if (!std::isfinite(s) || s < 0) throw std::invalid_argument("sigma must be finite and >= 0");
  }
  if (num_samples < 1) throw std::invalid_argument("num_samples must be >= 1");
  if (method == NoiseMethod::quadrature && num_samples < 8) {
    throw std::invalid_argument("quadrature needs at least 8 nodes per dimension");
  }
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

GaussHermite gauss_hermite_normal(int count) {
  if (count < 1) throw std::invalid_argument("node count must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
  // polynomials: off-diagonal entries sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(count, count);
  for (int k = 1; k < count; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussHermite gh;
  gh.nodes.resize(static_cast<std::size_t>(count));
  gh.weights.resize(static_cast<std::size_t>(count));
  double total = 0;
  for (int k = 0; k < count; ++k) {
    gh.nodes[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
    const double v0 = solver.eigenvectors()(0, k);
    gh.weights[static_cast<std::size_t>(k)] = v0 * v0;
    total += v0 * v0;
  }
  for (double& w : gh.weights) w /= total;
  return gh;
}

NoisyResult noisy_payoffs(const StrategyProfile& profile, const NoiseConfig& cfg,
                          GameVariant variant) {
  cfg.validate();
  const Angles a = angles_or_throw(profile.a);
  const Angles b = angles_or_throw(profile.b);
  const double st = cfg.theta_sigma();
  const double sp = cfg.phi_sigma();
  const FastGame game(variant);

  NoisyResult result;
  result.sigma = cfg.sigma;
  result.negativity_of_resource = negativity(corrupted_resource(st));

  if (cfg.method == NoiseMethod::quadrature) {
    const auto ga = perturbed_gates(a, st, sp, cfg.num_samples);
    const auto gb = perturbed_gates(b, st, sp, cfg.num_samples);
    double sum_a = 0;
    double sum_b = 0;
    for (const auto& x : ga) {
      double row_a = 0;
      double row_b = 0;
      for (const auto& y : gb) {
        const Payoffs p = game(x.u, y.u);
        row_a += y.weight * p.a;
        row_b += y.weight * p.b;
      }
      sum_a += x.weight * row_a;
      sum_b += x.weight * row_b;
    }
    result.mean_payoff_a = sum_a;
    result.mean_payoff_b = sum_b;
    return result;
  }

  const auto n = static_cast<std::size_t>(cfg.num_samples);
  std::vector<double> pa(n), pb(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = begin; i < end; ++i) {
      std::mt19937_64 rng(sample_seed(cfg.seed, i));
      normal.reset();
      const double e1 = st * normal(rng);
      const double e2 = sp * normal(rng);
      const double e3 = st * normal(rng);
      const double e4 = sp * normal(rng);
      const Payoffs p = game(strategy_unitary(a.theta + e1, a.phi + e2),
                             strategy_unitary(b.theta + e3, b.phi + e4));
      pa[i] = p.a;
      pb[i] = p.b;
    }
  };
  const auto workers = static_cast<std::size_t>(std::min<int>(cfg.workers, cfg.num_samples));
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) threads.emplace_back(work, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  // Serial reduction in sample order keeps the sums bit-identical for any
  // worker count.
  auto mean_and_error = [n](const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    if (n < 2) return std::pair{mean, 0.0};
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(n - 1);
    return std::pair{mean, std::sqrt(var / static_cast<double>(n))};
  };
  std::tie(result.mean_payoff_a, result.std_error_a) = mean_and_error(pa);
  std::tie(result.mean_payoff_b, result.std_error_b) = mean_and_error(pb);
  return result;
}

std::vector<GapPoint> payoff_gap_curve(const std::vector<double>& sigmas,
                                       const StrategyProfile& profile, const NoiseConfig& cfg) {
  if (!std::is_sorted(sigmas.begin(), sigmas.end())) {
    throw std::invalid_argument("sigmas must be sorted ascending");
  }
  const double ideal = payoffs(outcome_distribution(profile, GameVariant::entangled)).a;
  std::vector<GapPoint> out;
  out.reserve(sigmas.size());
  for (double s : sigmas) {
    NoiseConfig c = cfg;
    c.sigma = s;
    const NoisyResult r = noisy_payoffs(profile, c);
    out.push_back({s, ideal - r.mean_payoff_a, r.std_error_a, r.negativity_of_resource});
  }
  return out;
}

Density corrupted_resource(double sigma, int nodes) {
  if (!std::isfinite(sigma) || sigma < 0) throw std::invalid_argument("sigma must be >= 0");
  const State ideal = apply_unitary(basis_state(2, 0), preparation_stage(GameVariant::entangled));
  CMatrix<double> rho = ideal.amplitudes() * ideal.amplitudes().adjoint();
  if (sigma == 0) return Density(2, rho);

  const GaussHermite gh = gauss_hermite_normal(nodes);
  const Gate2 eye = Gate2::Identity();
  // Independent noise per player: apply the averaged channel on A, then on B.
  for (int wire = 0; wire < 2; ++wire) {
    CMatrix<double> acc = CMatrix<double>::Zero(4, 4);
    for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
      const Gate2 r = gates::ry<double>(sigma * gh.nodes[k]);
      const Matrix4c u = wire == 0 ? Matrix4c(kron(r, eye)) : Matrix4c(kron(eye, r));
      acc += gh.weights[k] * (u * rho * u.adjoint());
    }
    rho = acc;
  }
  return Density(2, rho);
}

Density mixed_input(double x) {
  check_x(x);
  Gate2 single = Gate2::Zero();
  single(0, 0) = 1 - x;
  single(1, 1) = x;
  return Density(2, kron(single, single));
}

MixedInputResult mixed_input_game(double x, const StrategyProfile& profile,
                                  GameVariant variant) {
  const Density input = mixed_input(x);
  const Density out = evolve(profile, variant, input);
  const RVector<double> p = diagonal_probabilities(out);
  const OutcomeDistribution dist{p(0), p(1), p(2), p(3)};
  return {dist, payoffs(dist), conjugate(input, preparation_stage(variant))};
}

namespace {

double min_pt_eigenvalue(double x) {
  const Density resource =
      conjugate(mixed_input(x), preparation_stage(GameVariant::entangled));
  return partial_transpose_spectrum(resource).minCoeff();
}

}  // namespace

double separability_threshold(double tol) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
  constexpr int kGrid = 51;
  double previous = -1e300;
  for (int k = 0; k < kGrid; ++k) {
    const double value = min_pt_eigenvalue(0.5 * k / (kGrid - 1));
    if (value < previous - 1e-12) {
      throw std::runtime_error("partial-transpose spectrum is not monotone in x; "
                               "bisection for the separability boundary is unsafe");
    }
    previous = value;
  }
  auto separable = [](double x) {
    return is_ppt(conjugate(mixed_input(x), preparation_stage(GameVariant::entangled)));
  };
  double lo = 0.0;
  double hi = 0.5;
  if (separable(lo)) return lo;
  if (!separable(hi)) throw std::runtime_error("resource is entangled for every x in [0, 0.5]");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (separable(mid) ? hi : lo) = mid;
  }
  return hi;
}

MixedParetoReport pareto_scan_mixed(double x, int steps) {
  check_x(x);
  if (steps < 3) throw std::invalid_argument("steps must be >= 3");
  const std::vector<double> ps = p_grid(steps);
  const Density input = mixed_input(x);
  std::vector<Gate2> gates_for_p;
  for (double p : ps) gates_for_p.push_back(strategy_matrix(Strategy::from_p(p)));

  MixedParetoReport report;
  report.x = x;
  report.steps = steps;
  report.resource_separable = is_ppt(conjugate(input, preparation_stage(GameVariant::entangled)));
  report.max_symmetric_payoff = -1;
  report.max_min_payoff = -1;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const Matrix4c u = circuit_unitary(gates_for_p[i], gates_for_p[j], GameVariant::entangled);
      const RVector<double> p = diagonal_probabilities(conjugate(input, u));
      const Payoffs pay = payoffs({p(0), p(1), p(2), p(3)});
      if (pay.a >= 3 - 1e-9 && pay.b >= 3 - 1e-9) ++report.profiles_reaching_cp;
      report.max_min_payoff = std::max(report.max_min_payoff, std::min(pay.a, pay.b));
      if (i == j && pay.a > report.max_symmetric_payoff) {
        report.max_symmetric_payoff = pay.a;
        report.argmax_p = ps[i];
      }
    }
  }
  return report;
}

}  // namespace qpd
