#pragma once

#include <complex>

#include <Eigen/Dense>

namespace phasekit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Default entrywise tolerance used by structural checks.
inline constexpr double kDefaultTolerance = 1e-10;

/// Largest absolute entry (max-entry norm).
double max_abs(const ComplexMatrix& a);

/// max |A - A^dagger| entrywise.
double hermiticity_defect(const ComplexMatrix& a);

/// max |U^dagger U - 1| entrywise.
double unitarity_defect(const ComplexMatrix& u);

/// Commutator [a, b] and anticommutator {a, b}.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Eigen-pairs of a Hermitian matrix. Eigenvalues ascending, eigenvectors
/// are the columns of a unitary matrix.
struct SpectralDecomposition {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  ComplexMatrix reconstruct() const;
};

/// Diagonalizes a Hermitian matrix.
///
/// The input must be Hermitian to within `hermitian_tol` times
/// max(1, max_abs(a)); otherwise a DomainError carrying the measured
/// asymmetry is thrown. Failure of the iterative solver raises
/// NumericalError.
SpectralDecomposition eig_hermitian(const ComplexMatrix& a, double hermitian_tol = 1e-12);

/// exp(-i theta H) for Hermitian H, evaluated as V diag(exp(-i theta lambda)) V^dagger.
ComplexMatrix expm_generator(const ComplexMatrix& h, double theta);
ComplexMatrix expm_generator(const SpectralDecomposition& spectrum, double theta);

struct SymmetricEigenPair {
  double value;
  Vector3 vector;
};

/// Largest eigenvalue of a real symmetric 3x3 matrix with a unit eigenvector.
SymmetricEigenPair max_eig_sym3(const Matrix3& m);

}  // namespace phasekit
