#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "phasekit/numerics.hpp"
#include "phasekit/spinspace.hpp"

namespace phasekit {

/// Normalized state vector on a SpinSpace.
class PureState {
 public:
  /// Throws DomainError if the norm differs from 1 by more than 1e-12 or the
  /// dimension does not match.
  PureState(SpinSpace space, ComplexVector amplitudes);

  /// Normalizes and applies the phase convention (first non-zero amplitude
  /// real and positive).
  static PureState canonical(SpinSpace space, ComplexVector amplitudes);

  const SpinSpace& space() const { return space_; }
  const ComplexVector& amplitudes() const { return amps_; }
  Complex amplitude(HalfInt mu) const { return amps_(space_.index_of(mu)); }
  ComplexMatrix density() const { return amps_ * amps_.adjoint(); }

  Complex expectation(const ComplexMatrix& op) const;

 private:
  SpinSpace space_;
  ComplexVector amps_;
};

/// Density matrix with a cached spectral decomposition.
class MixedState {
 public:
  /// Validates Hermiticity, unit trace and positivity (eigenvalues >= -1e-12).
  /// Round-off negatives are clamped to zero and the spectrum renormalized.
  MixedState(SpinSpace space, const ComplexMatrix& rho);
  explicit MixedState(const PureState& pure);

  const SpinSpace& space() const { return space_; }
  const ComplexMatrix& rho() const { return rho_; }
  const SpectralDecomposition& spectrum() const { return spectrum_; }

  double purity() const;
  int rank(double threshold = 1e-12) const;
  /// True when the largest eigenvalue exceeds 1 - 1e-12.
  bool effectively_pure() const;
  /// Eigenvector of the largest eigenvalue, phase-normalized.
  PureState dominant() const;

  Complex expectation(const ComplexMatrix& op) const;

 private:
  SpinSpace space_;
  ComplexMatrix rho_;
  SpectralDecomposition spectrum_;
};

using State = std::variant<PureState, MixedState>;

const SpinSpace& space_of(const State& state);
ComplexMatrix density_of(const State& state);
MixedState as_mixed(const State& state);

/// Two-mode Fock state |j+mu>_a |j-mu>_b.
PureState fock(const SpinSpace& space, HalfInt mu);

/// |N/2>_a |N/2>_b; requires even N.
PureState twin_fock(const SpinSpace& space);

/// All N qubits along (sin p cos a, sin p sin a, cos p):
/// exp(-i azimuth J_z) exp(-i polar J_y) |j, +j>, with amplitudes
/// sqrt(C(N, j+mu)) cos^{j+mu}(p/2) sin^{j-mu}(p/2) exp(+i (j-mu) azimuth).
PureState coherent_spin(const SpinSpace& space, double polar, double azimuth);

/// (|j,+j> + |j,-j>)/sqrt(2).
PureState noon(const SpinSpace& space);

/// (|j,+j>_n + |j,-j>_n)/sqrt(2) for the extremal eigenstates of J_n,
/// obtained by rotating the NOON state so that z maps onto n.
PureState ghz_along(const SpinSpace& space, const SpinAxis& axis);

/// Convex combination sum_k w_k rho_k. Weights must be positive and sum to 1
/// within 1e-12; all states must share one space.
MixedState mix(const std::vector<std::pair<double, State>>& components);

/// Mean spin vector (<J_x>, <J_y>, <J_z>).
Vector3 mean_spin(const State& state);

/// Symmetrized covariance of (J_x, J_y, J_z).
Matrix3 spin_covariance(const State& state);

}  // namespace phasekit
