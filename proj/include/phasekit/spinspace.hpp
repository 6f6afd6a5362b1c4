#pragma once

#include <compare>

#include "phasekit/numerics.hpp"

namespace phasekit {

/// A half-integer stored as twice its value, so labels such as mu = -3/2
/// never drift through floating point.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt integer(int value) { return HalfInt(2 * value); }
  /// Accepts values within 1e-9 of a multiple of 1/2; throws DomainError otherwise.
  static HalfInt from_double(double value);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
  constexpr auto operator<=>(const HalfInt&) const = default;

 private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

/// Symmetric (N+1)-dimensional subspace of N qubits, spanned by the Dicke
/// states |j, mu>, j = N/2. Basis index 0 is mu = -j (ascending order).
class SpinSpace {
 public:
  explicit SpinSpace(int n_particles);

  int n_particles() const { return n_; }
  HalfInt j() const { return HalfInt::from_twice(n_); }
  int dim() const { return n_ + 1; }

  HalfInt mu_at(int index) const;
  int index_of(HalfInt mu) const;
  bool contains(HalfInt mu) const;

  bool operator==(const SpinSpace&) const = default;

 private:
  int n_;
};

/// Unit vector n defining J_n = n . J.
class SpinAxis {
 public:
  /// Throws DomainError unless |n| = 1 within 1e-12.
  explicit SpinAxis(const Vector3& n);
  /// Rescales any non-zero vector onto the unit sphere.
  static SpinAxis normalized(const Vector3& v);
  static SpinAxis spherical(double polar, double azimuth);
  static SpinAxis x() { return SpinAxis(Vector3::UnitX()); }
  static SpinAxis y() { return SpinAxis(Vector3::UnitY()); }
  static SpinAxis z() { return SpinAxis(Vector3::UnitZ()); }

  const Vector3& vector() const { return n_; }
  double operator[](int i) const { return n_(i); }

 private:
  Vector3 n_;
};

ComplexMatrix op_jz(const SpinSpace& space);
ComplexMatrix op_jplus(const SpinSpace& space);
ComplexMatrix op_jminus(const SpinSpace& space);
ComplexMatrix op_jx(const SpinSpace& space);
ComplexMatrix op_jy(const SpinSpace& space);

/// n_x J_x + n_y J_y + n_z J_z in the Dicke basis.
ComplexMatrix op_j(const SpinSpace& space, const SpinAxis& axis);

/// (N/2)(N/2 + 1); verifies J_x^2 + J_y^2 + J_z^2 equals it times identity.
double casimir(const SpinSpace& space);

/// Wigner rotation element d^j_{mu,nu}(theta) = <j,mu| exp(-i theta J_y) |j,nu>.
///
/// Evaluated through the Jacobi-polynomial closed form after mapping
/// (mu, nu) with the symmetry relations onto nu >= |mu|, where every power
/// of sin/cos is non-negative and theta = 0, pi need no special casing.
/// Throws DomainError for |mu| > j, |nu| > j or labels off the j lattice.
double wigner_d(HalfInt j, HalfInt mu, HalfInt nu, double theta);

/// Above this j the closed form loses digits to cancellation between the
/// factorial prefactor and the Jacobi polynomial.
inline constexpr int kWignerReliableTwiceJ = 100;
inline bool wigner_d_reduced_accuracy(HalfInt j) { return j.twice() > kWignerReliableTwiceJ; }

/// Full (N+1)x(N+1) Wigner matrix in ascending-mu order.
Eigen::MatrixXd wigner_d_matrix(const SpinSpace& space, double theta);

/// exp(-i theta J_n).
ComplexMatrix rotation(const SpinSpace& space, const SpinAxis& axis, double theta);

/// exp(-i theta J_z).
ComplexMatrix phase_shifter(const SpinSpace& space, double theta);

/// exp(-i theta J_x): symmetric beam splitter of mixing angle theta.
ComplexMatrix beam_splitter(const SpinSpace& space, double theta);

/// Balanced Mach-Zehnder with opposite-angle beam splitters:
/// exp(i pi/2 J_x) exp(-i theta J_z) exp(-i pi/2 J_x), equal to exp(-i theta J_y).
ComplexMatrix mach_zehnder(const SpinSpace& space, double theta);

}  // namespace phasekit
