#include "phasekit/spinspace.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "phasekit/errors.hpp"

namespace phasekit {

HalfInt HalfInt::from_double(double value) {
  const double twice = 2.0 * value;
  const double rounded = std::round(twice);
  if (!std::isfinite(value) || std::abs(twice - rounded) > 2e-9) {
    std::ostringstream msg;
    msg << "HalfInt: " << value << " is not a multiple of 1/2";
    throw DomainError(msg.str());
  }
  return HalfInt(static_cast<int>(rounded));
}

SpinSpace::SpinSpace(int n_particles) : n_(n_particles) {
  if (n_particles < 1) {
    throw DomainError("SpinSpace: number of particles must be positive");
  }
}

HalfInt SpinSpace::mu_at(int index) const {
  if (index < 0 || index >= dim()) {
    throw DomainError("SpinSpace::mu_at: index out of range");
  }
  return HalfInt::from_twice(2 * index - n_);
}

bool SpinSpace::contains(HalfInt mu) const {
  return std::abs(mu.twice()) <= n_ && (mu.twice() + n_) % 2 == 0;
}

int SpinSpace::index_of(HalfInt mu) const {
  if (!contains(mu)) {
    std::ostringstream msg;
    msg << "SpinSpace: mu = " << mu.value() << " is not a label of j = " << j().value();
    throw DomainError(msg.str());
  }
  return (mu.twice() + n_) / 2;
}

SpinAxis::SpinAxis(const Vector3& n) : n_(n) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-12) {
    throw DomainError("SpinAxis: axis must be a unit vector");
  }
}

SpinAxis SpinAxis::normalized(const Vector3& v) {
  const double norm = v.norm();
  if (!v.allFinite() || norm < 1e-14) {
    throw DomainError("SpinAxis: cannot normalize a zero or non-finite vector");
  }
  return SpinAxis(v / norm);
}

SpinAxis SpinAxis::spherical(double polar, double azimuth) {
  return normalized(Vector3(std::sin(polar) * std::cos(azimuth),
                            std::sin(polar) * std::sin(azimuth), std::cos(polar)));
}

ComplexMatrix op_jz(const SpinSpace& space) {
  ComplexMatrix jz = ComplexMatrix::Zero(space.dim(), space.dim());
  for (int i = 0; i < space.dim(); ++i) jz(i, i) = space.mu_at(i).value();
  return jz;
}

ComplexMatrix op_jplus(const SpinSpace& space) {
  const double j = space.j().value();
  ComplexMatrix jp = ComplexMatrix::Zero(space.dim(), space.dim());
  for (int i = 0; i + 1 < space.dim(); ++i) {
    const double mu = space.mu_at(i).value();
    jp(i + 1, i) = std::sqrt(j * (j + 1.0) - mu * (mu + 1.0));
  }
  return jp;
}

ComplexMatrix op_jminus(const SpinSpace& space) { return op_jplus(space).adjoint(); }

ComplexMatrix op_jx(const SpinSpace& space) {
  const ComplexMatrix jp = op_jplus(space);
  return 0.5 * (jp + jp.adjoint());
}

ComplexMatrix op_jy(const SpinSpace& space) {
  const ComplexMatrix jp = op_jplus(space);
  return Complex(0.0, -0.5) * (jp - jp.adjoint());
}

ComplexMatrix op_j(const SpinSpace& space, const SpinAxis& axis) {
  const ComplexMatrix jp = op_jplus(space);
  const ComplexMatrix jm = jp.adjoint();
  // n_x (J+ + J-)/2 + n_y (J+ - J-)/(2i) + n_z J_z
  const Complex cp(0.5 * axis[0], -0.5 * axis[1]);
  const Complex cm(0.5 * axis[0], 0.5 * axis[1]);
  ComplexMatrix out = cp * jp + cm * jm;
  out += axis[2] * op_jz(space);
  return out;
}

double casimir(const SpinSpace& space) {
  const double j = space.j().value();
  const double value = j * (j + 1.0);
  const ComplexMatrix jx = op_jx(space);
  const ComplexMatrix jy = op_jy(space);
  const ComplexMatrix jz = op_jz(space);
  const ComplexMatrix j2 = jx * jx + jy * jy + jz * jz;
  const double defect = max_abs(j2 - value * ComplexMatrix::Identity(space.dim(), space.dim()));
  if (defect > kDefaultTolerance * std::max(1.0, value)) {
    throw NumericalError("casimir: J^2 is not proportional to the identity");
  }
  return value;
}

namespace {

// P_n^{(alpha, beta)}(x) by the standard three-term recurrence in n.
double jacobi(int n, int alpha, int beta, double x) {
  const double a = alpha;
  const double b = beta;
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    const double c1 = 2.0 * (k + 1) * (k + a + b + 1.0) * s;
    const double c2 = (s + 1.0) * ((s + 2.0) * s * x + a * a - b * b);
    const double c3 = 2.0 * (k + a) * (k + b) * (s + 2.0);
    const double next = (c2 * cur - c3 * prev) / c1;
    prev = cur;
    cur = next;
  }
  return cur;
}

// ln(n!) for the non-negative integers entering the prefactor.
double log_factorial(int n) { return std::lgamma(n + 1.0); }

int sign_of_power(int exponent) { return (exponent % 2 == 0) ? 1 : -1; }

}  // namespace

double wigner_d(HalfInt j, HalfInt mu, HalfInt nu, double theta) {
  if (j.twice() < 0 || std::abs(mu.twice()) > j.twice() || std::abs(nu.twice()) > j.twice() ||
      (j.twice() - mu.twice()) % 2 != 0 || (j.twice() - nu.twice()) % 2 != 0) {
    std::ostringstream msg;
    msg << "wigner_d: invalid quantum numbers j=" << j.value() << " mu=" << mu.value()
        << " nu=" << nu.value();
    throw DomainError(msg.str());
  }
  // Reduce to nu' >= |mu'| via d_{mu,nu} = (-1)^{mu-nu} d_{nu,mu}
  // and d_{mu,nu} = (-1)^{mu-nu} d_{-mu,-nu}.
  const int diff = std::abs(mu.twice() - nu.twice()) / 2;
  int sign = 1;
  HalfInt m = mu;
  HalfInt n = nu;
  const int a = std::max(std::abs(mu.twice()), std::abs(nu.twice()));
  if (nu.twice() == a) {
    // already in range
  } else if (-nu.twice() == a) {
    m = -mu;
    n = -nu;
    sign = sign_of_power(diff);
  } else if (mu.twice() == a) {
    m = nu;
    n = mu;
    sign = sign_of_power(diff);
  } else {
    m = -nu;
    n = -mu;
  }

  const int alpha = (n.twice() - m.twice()) / 2;  // nu - mu >= 0
  const int beta = (n.twice() + m.twice()) / 2;   // nu + mu >= 0
  const int degree = (j.twice() - n.twice()) / 2;
  const int jm = (j.twice() - m.twice()) / 2;
  const int jp = (j.twice() + m.twice()) / 2;
  const int jn = (j.twice() - n.twice()) / 2;
  const int jnp = (j.twice() + n.twice()) / 2;

  const double log_pref =
      0.5 * (log_factorial(jn) + log_factorial(jnp) - log_factorial(jm) - log_factorial(jp));
  const double s = std::sin(0.5 * theta);
  const double c = std::cos(0.5 * theta);
  const double value = std::exp(log_pref) * std::pow(s, alpha) * std::pow(c, beta) *
                       jacobi(degree, alpha, beta, std::cos(theta));
  return sign * value;
}

Eigen::MatrixXd wigner_d_matrix(const SpinSpace& space, double theta) {
  Eigen::MatrixXd d(space.dim(), space.dim());
  for (int r = 0; r < space.dim(); ++r) {
    for (int c = 0; c < space.dim(); ++c) {
      d(r, c) = wigner_d(space.j(), space.mu_at(r), space.mu_at(c), theta);
    }
  }
  return d;
}

ComplexMatrix rotation(const SpinSpace& space, const SpinAxis& axis, double theta) {
  return expm_generator(op_j(space, axis), theta);
}

ComplexMatrix phase_shifter(const SpinSpace& space, double theta) {
  return rotation(space, SpinAxis::z(), theta);
}

ComplexMatrix beam_splitter(const SpinSpace& space, double theta) {
  return rotation(space, SpinAxis::x(), theta);
}

ComplexMatrix mach_zehnder(const SpinSpace& space, double theta) {
  constexpr double half_pi = 0.5 * std::numbers::pi;
  return beam_splitter(space, -half_pi) * phase_shifter(space, theta) *
         beam_splitter(space, half_pi);
}

}  // namespace phasekit
