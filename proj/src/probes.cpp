#include "phasekit/probes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "phasekit/errors.hpp"

namespace phasekit {

namespace {

constexpr double kNormTolerance = 1e-12;
constexpr double kPhaseThreshold = 1e-14;

ComplexVector phase_normalized(ComplexVector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > kPhaseThreshold) {
      v *= std::conj(v(i)) / mag;
      v(i) = mag;
      break;
    }
  }
  return v;
}

}  // namespace

PureState::PureState(SpinSpace space, ComplexVector amplitudes)
    : space_(space), amps_(std::move(amplitudes)) {
  if (amps_.size() != space_.dim()) {
    throw DomainError("PureState: amplitude count does not match the space dimension");
  }
  if (!amps_.allFinite() || std::abs(amps_.squaredNorm() - 1.0) > kNormTolerance) {
    throw DomainError("PureState: amplitudes are not normalized");
  }
}

PureState PureState::canonical(SpinSpace space, ComplexVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!amplitudes.allFinite() || norm < 1e-300) {
    throw DomainError("PureState: cannot normalize a zero vector");
  }
  return PureState(space, phase_normalized(amplitudes / norm));
}

Complex PureState::expectation(const ComplexMatrix& op) const {
  return amps_.dot(op * amps_);
}

MixedState::MixedState(SpinSpace space, const ComplexMatrix& rho) : space_(space), rho_(rho) {
  if (rho_.rows() != space_.dim() || rho_.cols() != space_.dim()) {
    throw DomainError("MixedState: density matrix dimension does not match the space");
  }
  if (hermiticity_defect(rho_) > 1e-12) {
    throw DomainError("MixedState: density matrix is not Hermitian");
  }
  const Complex trace = rho_.trace();
  if (std::abs(trace - 1.0) > kNormTolerance) {
    std::ostringstream msg;
    msg << "MixedState: trace is " << trace.real() << ", expected 1";
    throw DomainError(msg.str());
  }
  rho_ = 0.5 * (rho_ + rho_.adjoint());
  spectrum_ = eig_hermitian(rho_);
  if (spectrum_.eigenvalues.minCoeff() < -1e-12) {
    throw DomainError("MixedState: density matrix has a negative eigenvalue");
  }
  if (spectrum_.eigenvalues.minCoeff() < 0.0) {
    spectrum_.eigenvalues = spectrum_.eigenvalues.cwiseMax(0.0);
    spectrum_.eigenvalues /= spectrum_.eigenvalues.sum();
    rho_ = spectrum_.reconstruct();
  }
}

MixedState::MixedState(const PureState& pure) : MixedState(pure.space(), pure.density()) {}

double MixedState::purity() const { return spectrum_.eigenvalues.squaredNorm(); }

int MixedState::rank(double threshold) const {
  return static_cast<int>((spectrum_.eigenvalues.array() > threshold).count());
}

bool MixedState::effectively_pure() const {
  return spectrum_.eigenvalues.maxCoeff() > 1.0 - 1e-12;
}

PureState MixedState::dominant() const {
  const int top = spectrum_.dim() - 1;
  return PureState::canonical(space_, spectrum_.eigenvectors.col(top));
}

Complex MixedState::expectation(const ComplexMatrix& op) const { return (rho_ * op).trace(); }

const SpinSpace& space_of(const State& state) {
  return std::visit([](const auto& s) -> const SpinSpace& { return s.space(); }, state);
}

ComplexMatrix density_of(const State& state) {
  if (const auto* pure = std::get_if<PureState>(&state)) return pure->density();
  return std::get<MixedState>(state).rho();
}

MixedState as_mixed(const State& state) {
  if (const auto* pure = std::get_if<PureState>(&state)) return MixedState(*pure);
  return std::get<MixedState>(state);
}

PureState fock(const SpinSpace& space, HalfInt mu) {
  ComplexVector v = ComplexVector::Zero(space.dim());
  v(space.index_of(mu)) = 1.0;
  return PureState(space, v);
}

PureState twin_fock(const SpinSpace& space) {
  if (space.n_particles() % 2 != 0) {
    throw DomainError("twin_fock: requires an even number of particles");
  }
  return fock(space, HalfInt::integer(0));
}

PureState coherent_spin(const SpinSpace& space, double polar, double azimuth) {
  const int n = space.n_particles();
  const double c = std::cos(0.5 * polar);
  const double s = std::sin(0.5 * polar);
  ComplexVector v(space.dim());
  for (int i = 0; i < space.dim(); ++i) {
    const int up = i;         // j + mu
    const int down = n - i;   // j - mu
    const double log_binom = std::lgamma(n + 1.0) - std::lgamma(up + 1.0) - std::lgamma(down + 1.0);
    const double mag = std::exp(0.5 * log_binom) * std::pow(c, up) * std::pow(s, down);
    v(i) = std::polar(1.0, down * azimuth) * mag;
  }
  return PureState::canonical(space, v);
}

PureState noon(const SpinSpace& space) {
  ComplexVector v = ComplexVector::Zero(space.dim());
  const double amp = 1.0 / std::sqrt(2.0);
  v(0) += amp;
  v(space.dim() - 1) += amp;
  return PureState(space, v);
}

PureState ghz_along(const SpinSpace& space, const SpinAxis& axis) {
  const Vector3& n = axis.vector();
  if (n == Vector3::UnitZ()) return noon(space);
  const double polar = std::acos(std::clamp(n(2), -1.0, 1.0));
  const double azimuth = (std::hypot(n(0), n(1)) > 1e-15) ? std::atan2(n(1), n(0)) : 0.0;
  const ComplexMatrix r =
      rotation(space, SpinAxis::z(), azimuth) * rotation(space, SpinAxis::y(), polar);
  return PureState::canonical(space, r * noon(space).amplitudes());
}

MixedState mix(const std::vector<std::pair<double, State>>& components) {
  if (components.empty()) {
    throw DomainError("mix: no components");
  }
  const SpinSpace& space = space_of(components.front().second);
  double total = 0.0;
  ComplexMatrix rho = ComplexMatrix::Zero(space.dim(), space.dim());
  for (const auto& [weight, state] : components) {
    if (!(weight > 0.0)) {
      throw DomainError("mix: weights must be positive");
    }
    if (!(space_of(state) == space)) {
      throw DomainError("mix: components live on different spaces");
    }
    total += weight;
    rho += weight * density_of(state);
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "mix: weights sum to " << total << ", expected 1";
    throw DomainError(msg.str());
  }
  return MixedState(space, rho);
}

Vector3 mean_spin(const State& state) {
  const SpinSpace& space = space_of(state);
  const ComplexMatrix rho = density_of(state);
  return {(rho * op_jx(space)).trace().real(), (rho * op_jy(space)).trace().real(),
          (rho * op_jz(space)).trace().real()};
}

Matrix3 spin_covariance(const State& state) {
  const SpinSpace& space = space_of(state);
  const ComplexMatrix rho = density_of(state);
  const ComplexMatrix ops[3] = {op_jx(space), op_jy(space), op_jz(space)};
  Vector3 mean;
  for (int i = 0; i < 3; ++i) mean(i) = (rho * ops[i]).trace().real();
  Matrix3 cov;
  for (int i = 0; i < 3; ++i) {
    for (int k = i; k < 3; ++k) {
      const double sym = (rho * (ops[i] * ops[k] + ops[k] * ops[i])).trace().real();
      cov(i, k) = 0.5 * sym - mean(i) * mean(k);
      cov(k, i) = cov(i, k);
    }
  }
  return cov;
}

}  // namespace phasekit
