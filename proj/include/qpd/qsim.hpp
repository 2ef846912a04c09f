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

// Dense state-vector and density-matrix simulation for a handful of qubits.
//
// Bit ordering: qubit 0 is the most significant bit of a basis index, so for
// n qubits wire w lives at bit (n - 1 - w). |01> has index 1 and means
// qubit 0 in |0>, qubit 1 in |1>.
//
// Rotation convention: R_k(mu) = exp(-i mu sigma_k / 2) for k in {x, y, z}.

#ifndef QPD_QSIM_HPP_
#define QPD_QSIM_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qpd {

template <typename Scalar>
using Complex = std::complex<Scalar>;
template <typename Scalar>
using Gate = Eigen::Matrix<Complex<Scalar>, 2, 2>;
template <typename Scalar>
using Spinor = Eigen::Matrix<Complex<Scalar>, 2, 1>;
template <typename Scalar>
using Ket = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using CMatrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr int kMaxQubits = 8;

namespace tol {
inline constexpr double kNorm = 1e-12;
inline constexpr double kUnitary = 1e-12;
inline constexpr double kHermitian = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kMinEigenvalue = -1e-9;
inline constexpr double kBranch = 1e-12;
inline constexpr double kWeightSum = 1e-12;
inline constexpr double kPpt = 1e-10;
}  // namespace tol

// Thrown when a postselected measurement branch has (numerically) zero
// probability.
class ImpossiblePostselection : public std::runtime_error {
 public:
  explicit ImpossiblePostselection(double probability)
      : std::runtime_error("impossible postselection branch (probability " +
                           std::to_string(probability) + ")"),
        probability_(probability) {}
  double probability() const { return probability_; }

 private:
  double probability_;
};

namespace detail {

inline void check_num_qubits(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("num_qubits must be in [1, " +
                                std::to_string(kMaxQubits) + "], got " +
                                std::to_string(num_qubits));
  }
}

inline void check_wire(int wire, int num_qubits) {
  if (wire < 0 || wire >= num_qubits) {
    throw std::out_of_range("wire " + std::to_string(wire) +
                            " out of range for " + std::to_string(num_qubits) +
                            " qubits");
  }
}

inline std::uint64_t wire_mask(int wire, int num_qubits) {
  return std::uint64_t{1} << (num_qubits - 1 - wire);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gates

namespace gates {

template <typename Scalar = double>
Gate<Scalar> identity() {
  return Gate<Scalar>::Identity();
}

template <typename Scalar = double>
Gate<Scalar> hadamard() {
  const Scalar s = Scalar(1) / std::sqrt(Scalar(2));
  Gate<Scalar> g;
  g << s, s, s, -s;
  return g;
}

template <typename Scalar = double>
Gate<Scalar> pauli_x() {
  Gate<Scalar> g;
  g << 0, 1, 1, 0;
  return g;
}

template <typename Scalar = double>
Gate<Scalar> pauli_y() {
  const Complex<Scalar> i(0, 1);
  Gate<Scalar> g;
  g << Scalar(0), -i, i, Scalar(0);
  return g;
}

template <typename Scalar = double>
Gate<Scalar> pauli_z() {
  Gate<Scalar> g;
  g << 1, 0, 0, -1;
  return g;
}

// exp(-i mu sigma / 2) for a Pauli matrix sigma.
template <typename Scalar>
Gate<Scalar> rotation(const Gate<Scalar>& pauli, Scalar mu) {
  const Complex<Scalar> i(0, 1);
  return std::cos(mu / 2) * Gate<Scalar>::Identity() -
         i * std::sin(mu / 2) * pauli;
}

template <typename Scalar>
Gate<Scalar> rx(Scalar mu) {
  return rotation<Scalar>(pauli_x<Scalar>(), mu);
}
template <typename Scalar>
Gate<Scalar> ry(Scalar mu) {
  return rotation<Scalar>(pauli_y<Scalar>(), mu);
}
template <typename Scalar>
Gate<Scalar> rz(Scalar mu) {
  return rotation<Scalar>(pauli_z<Scalar>(), mu);
}

}  // namespace gates

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& u, double tolerance = tol::kUnitary) {
  if (u.rows() != u.cols()) return false;
  const auto product = (u.adjoint() * u).eval();
  const auto eye = decltype(product)::Identity(u.rows(), u.cols());
  return ((product - eye).cwiseAbs().maxCoeff() <= tolerance);
}

// Kronecker product of two dense matrices.
template <typename A, typename B>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using S = typename A::Scalar;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                       a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pure states

template <typename Scalar = double>
class PureState {
 public:
  // Validates length 2^num_qubits, finiteness and unit norm.
  PureState(int num_qubits, Ket<Scalar> amplitudes)
      : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {
    detail::check_num_qubits(num_qubits_);
    if (amplitudes_.size() != (Eigen::Index{1} << num_qubits_)) {
      throw std::invalid_argument("amplitude count must be 2^num_qubits");
    }
    if (!detail::all_finite(amplitudes_)) {
      throw std::invalid_argument("amplitudes must be finite");
    }
    if (std::abs(amplitudes_.squaredNorm() - Scalar(1)) > tol::kNorm) {
      throw std::invalid_argument("state is not normalized");
    }
  }

  // Normalizes the given vector first; throws on a zero vector.
  static PureState normalized(int num_qubits, Ket<Scalar> amplitudes) {
    const Scalar norm = amplitudes.norm();
    if (!(norm > Scalar(0))) throw std::invalid_argument("zero vector");
    amplitudes /= norm;
    return PureState(num_qubits, std::move(amplitudes));
  }

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const Ket<Scalar>& amplitudes() const { return amplitudes_; }
  Complex<Scalar> operator[](Eigen::Index i) const { return amplitudes_(i); }

 private:
  struct Unchecked {};
  PureState(Unchecked, int num_qubits, Ket<Scalar> amplitudes)
      : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {}

  template <typename S>
  friend PureState<S> apply_single(const PureState<S>&, const Gate<S>&, int);
  template <typename S>
  friend PureState<S> apply_cz(const PureState<S>&, int, int);

  int num_qubits_;
  Ket<Scalar> amplitudes_;
};

template <typename Scalar = double>
PureState<Scalar> basis_state(int num_qubits, std::int64_t index) {
  detail::check_num_qubits(num_qubits);
  const std::int64_t dim = std::int64_t{1} << num_qubits;
  if (index < 0 || index >= dim) {
    throw std::out_of_range("basis index " + std::to_string(index) +
                            " out of range");
  }
  Ket<Scalar> amps = Ket<Scalar>::Zero(dim);
  amps(index) = Scalar(1);
  return PureState<Scalar>(num_qubits, std::move(amps));
}

template <typename Scalar>
PureState<Scalar> apply_single(const PureState<Scalar>& state,
                               const Gate<Scalar>& gate, int wire) {
  const int n = state.num_qubits();
  detail::check_wire(wire, n);
  const std::uint64_t mask = detail::wire_mask(wire, n);
  Ket<Scalar> out = state.amplitudes();
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(out.size()); ++i) {
    if (i & mask) continue;
    const Complex<Scalar> a0 = out(i);
    const Complex<Scalar> a1 = out(i | mask);
    out(i) = gate(0, 0) * a0 + gate(0, 1) * a1;
    out(i | mask) = gate(1, 0) * a0 + gate(1, 1) * a1;
  }
  return PureState<Scalar>(typename PureState<Scalar>::Unchecked{}, n,
                           std::move(out));
}

template <typename Scalar>
PureState<Scalar> apply_cz(const PureState<Scalar>& state, int wire_a,
                           int wire_b) {
  const int n = state.num_qubits();
  detail::check_wire(wire_a, n);
  detail::check_wire(wire_b, n);
  if (wire_a == wire_b) throw std::invalid_argument("CZ wires must differ");
  const std::uint64_t both =
      detail::wire_mask(wire_a, n) | detail::wire_mask(wire_b, n);
  Ket<Scalar> out = state.amplitudes();
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(out.size()); ++i) {
    if ((i & both) == both) out(i) = -out(i);
  }
  return PureState<Scalar>(typename PureState<Scalar>::Unchecked{}, n,
                           std::move(out));
}

// Applies a full 2^n x 2^n unitary.
template <typename Scalar, typename Derived>
PureState<Scalar> apply_unitary(const PureState<Scalar>& state,
                                const Eigen::MatrixBase<Derived>& u) {
  if (u.rows() != state.dim() || u.cols() != state.dim()) {
    throw std::invalid_argument("unitary dimension mismatch");
  }
  return PureState<Scalar>::normalized(state.num_qubits(),
                                       (u * state.amplitudes()).eval());
}

template <typename Scalar>
struct Projection {
  PureState<Scalar> state;
  Scalar probability;
};

// Projects one wire onto |v><v| and renormalizes. The wire stays in the
// register, left in state v.
template <typename Scalar>
Projection<Scalar> project_onto(const PureState<Scalar>& state, int wire,
                                const Spinor<Scalar>& basis_vector) {
  const int n = state.num_qubits();
  detail::check_wire(wire, n);
  if (std::abs(basis_vector.squaredNorm() - Scalar(1)) > tol::kNorm) {
    throw std::invalid_argument("basis vector must be normalized");
  }
  const std::uint64_t mask = detail::wire_mask(wire, n);
  const Ket<Scalar>& in = state.amplitudes();
  Ket<Scalar> out(in.size());
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(in.size()); ++i) {
    if (i & mask) continue;
    // <v|psi> restricted to the remaining wires, then re-expand along v.
    const Complex<Scalar> overlap = std::conj(basis_vector(0)) * in(i) +
                                    std::conj(basis_vector(1)) * in(i | mask);
    out(i) = basis_vector(0) * overlap;
    out(i | mask) = basis_vector(1) * overlap;
  }
  const Scalar probability = out.squaredNorm();
  if (probability < Scalar(tol::kBranch)) {
    throw ImpossiblePostselection(static_cast<double>(probability));
  }
  out /= std::sqrt(probability);
  return {PureState<Scalar>(n, std::move(out)),
          std::min(probability, Scalar(1))};
}

// Marginal probabilities of the listed wires in the computational basis.
// Entry k corresponds to the bitstring of k with wires[0] most significant.
template <typename Scalar>
RVector<Scalar> computational_distribution(const PureState<Scalar>& state,
                                           std::span<const int> wires) {
  const int n = state.num_qubits();
  for (std::size_t a = 0; a < wires.size(); ++a) {
    detail::check_wire(wires[a], n);
    for (std::size_t b = a + 1; b < wires.size(); ++b) {
      if (wires[a] == wires[b]) throw std::invalid_argument("duplicate wire");
    }
  }
  const int k = static_cast<int>(wires.size());
  RVector<Scalar> probs = RVector<Scalar>::Zero(Eigen::Index{1} << k);
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(state.dim()); ++i) {
    std::uint64_t key = 0;
    for (int w : wires) key = (key << 1) | ((i & detail::wire_mask(w, n)) ? 1 : 0);
    probs(static_cast<Eigen::Index>(key)) += std::norm(state[i]);
  }
  return probs;
}

template <typename Scalar>
RVector<Scalar> computational_distribution(const PureState<Scalar>& state,
                                           std::initializer_list<int> wires) {
  return computational_distribution(
      state, std::span<const int>(wires.begin(), wires.size()));
}

// |<a|b>|, the phase-insensitive comparison used throughout.
template <typename Scalar>
Scalar overlap_magnitude(const PureState<Scalar>& a, const PureState<Scalar>& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw std::invalid_argument("qubit count mismatch");
  }
  return std::abs(a.amplitudes().dot(b.amplitudes()));
}

template <typename Scalar>
bool equal_up_to_phase(const PureState<Scalar>& a, const PureState<Scalar>& b,
                       double tolerance = 1e-10) {
  return std::abs(overlap_magnitude(a, b) - Scalar(1)) <= tolerance;
}

// ---------------------------------------------------------------------------
// Density matrices

template <typename Scalar = double>
class DensityMatrix {
 public:
  // Validates Hermiticity, unit trace and positivity (min eigenvalue >= -1e-9).
  DensityMatrix(int num_qubits, CMatrix<Scalar> entries)
      : num_qubits_(num_qubits), entries_(std::move(entries)) {
    detail::check_num_qubits(num_qubits_);
    const Eigen::Index dim = Eigen::Index{1} << num_qubits_;
    if (entries_.rows() != dim || entries_.cols() != dim) {
      throw std::invalid_argument("density matrix must be 2^n x 2^n");
    }
    if (!detail::all_finite(entries_)) {
      throw std::invalid_argument("density matrix entries must be finite");
    }
    if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > tol::kHermitian) {
      throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(entries_.trace() - Complex<Scalar>(1)) > tol::kTrace) {
      throw std::invalid_argument("density matrix trace is not 1");
    }
    // Symmetrize away roundoff before the eigen check.
    entries_ = (entries_ + entries_.adjoint().eval()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> solver(entries_,
                                                          Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < Scalar(tol::kMinEigenvalue)) {
      throw std::invalid_argument("density matrix is not positive semidefinite");
    }
  }

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return entries_.rows(); }
  const CMatrix<Scalar>& entries() const { return entries_; }
  Complex<Scalar> operator()(Eigen::Index r, Eigen::Index c) const {
    return entries_(r, c);
  }

 private:
  int num_qubits_;
  CMatrix<Scalar> entries_;
};

template <typename Scalar>
DensityMatrix<Scalar> pure_to_density(const PureState<Scalar>& state) {
  const Ket<Scalar>& v = state.amplitudes();
  return DensityMatrix<Scalar>(state.num_qubits(), v * v.adjoint());
}

// Convex combination; weights must be non-negative and sum to 1.
template <typename Scalar>
DensityMatrix<Scalar> mix(
    const std::vector<std::pair<Scalar, DensityMatrix<Scalar>>>& terms) {
  if (terms.empty()) throw std::invalid_argument("mix of nothing");
  const int n = terms.front().second.num_qubits();
  CMatrix<Scalar> acc = CMatrix<Scalar>::Zero(terms.front().second.dim(),
                                              terms.front().second.dim());
  Scalar total = 0;
  for (const auto& [w, rho] : terms) {
    if (w < 0) throw std::invalid_argument("negative mixture weight");
    if (rho.num_qubits() != n) throw std::invalid_argument("qubit count mismatch");
    acc += w * rho.entries();
    total += w;
  }
  if (std::abs(total - Scalar(1)) > tol::kWeightSum) {
    throw std::invalid_argument("mixture weights must sum to 1");
  }
  return DensityMatrix<Scalar>(n, std::move(acc));
}

// rho -> U rho U^dagger
template <typename Scalar, typename Derived>
DensityMatrix<Scalar> conjugate(const DensityMatrix<Scalar>& rho,
                                const Eigen::MatrixBase<Derived>& u) {
  if (u.rows() != rho.dim() || u.cols() != rho.dim()) {
    throw std::invalid_argument("unitary dimension mismatch");
  }
  return DensityMatrix<Scalar>(rho.num_qubits(),
                               (u * rho.entries() * u.adjoint()).eval());
}

template <typename Scalar>
RVector<Scalar> diagonal_probabilities(const DensityMatrix<Scalar>& rho) {
  return rho.entries().diagonal().real();
}

// Transposes the indices of the listed wires. Two-qubit matrices only.
template <typename Scalar>
CMatrix<Scalar> partial_transpose(const DensityMatrix<Scalar>& rho,
                                  std::span<const int> subsystem_wires) {
  if (rho.num_qubits() != 2) {
    throw std::invalid_argument("partial transpose supports 2 qubits only");
  }
  std::uint64_t swap_mask = 0;
  for (int w : subsystem_wires) {
    detail::check_wire(w, 2);
    swap_mask |= detail::wire_mask(w, 2);
  }
  const Eigen::Index dim = rho.dim();
  CMatrix<Scalar> out(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      // Exchange the row and column bits that belong to the subsystem.
      const auto ru = static_cast<std::uint64_t>(r);
      const auto cu = static_cast<std::uint64_t>(c);
      const auto r2 = (ru & ~swap_mask) | (cu & swap_mask);
      const auto c2 = (cu & ~swap_mask) | (ru & swap_mask);
      out(r, c) = rho(static_cast<Eigen::Index>(r2), static_cast<Eigen::Index>(c2));
    }
  }
  return out;
}

template <typename Scalar>
CMatrix<Scalar> partial_transpose(const DensityMatrix<Scalar>& rho,
                                  std::initializer_list<int> wires) {
  return partial_transpose(rho, std::span<const int>(wires.begin(), wires.size()));
}

// Spectrum of rho^{T_B}, ascending.
template <typename Scalar>
RVector<Scalar> partial_transpose_spectrum(const DensityMatrix<Scalar>& rho) {
  const CMatrix<Scalar> pt = partial_transpose(rho, {1});
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> solver(pt, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

// N = |sum of negative eigenvalues of rho^{T_B}|; 0 for PPT states.
template <typename Scalar>
Scalar negativity(const DensityMatrix<Scalar>& rho) {
  const RVector<Scalar> ev = partial_transpose_spectrum(rho);
  Scalar neg = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -Scalar(tol::kPpt)) neg -= ev(i);
  }
  return neg;
}

template <typename Scalar>
bool is_ppt(const DensityMatrix<Scalar>& rho, double tolerance = tol::kPpt) {
  return partial_transpose_spectrum(rho).minCoeff() >= -Scalar(tolerance);
}

}  // namespace qpd

#endif  // QPD_QSIM_HPP_
