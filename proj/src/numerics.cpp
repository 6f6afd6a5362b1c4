#include "phasekit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "phasekit/errors.hpp"

namespace phasekit {

double max_abs(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DomainError("hermiticity_defect: matrix is not square");
  }
  return max_abs(a - a.adjoint());
}

double unitarity_defect(const ComplexMatrix& u) {
  const auto n = u.rows();
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(n, n));
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b + b * a;
}

ComplexMatrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

SpectralDecomposition eig_hermitian(const ComplexMatrix& a, double hermitian_tol) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw DomainError("eig_hermitian: expected a non-empty square matrix");
  }
  if (!a.allFinite()) {
    throw DomainError("eig_hermitian: matrix has non-finite entries");
  }
  const double defect = hermiticity_defect(a);
  const double scale = std::max(1.0, max_abs(a));
  if (defect > hermitian_tol * scale) {
    std::ostringstream msg;
    msg << "eig_hermitian: matrix is not Hermitian (max |A - A^dagger| = " << defect << ")";
    throw DomainError(msg.str());
  }
  // Symmetrize so the solver sees an exactly Hermitian input.
  const ComplexMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig_hermitian: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix expm_generator(const SpectralDecomposition& spectrum, double theta) {
  const Eigen::ArrayXd phases = -theta * spectrum.eigenvalues.array();
  ComplexVector diag(spectrum.dim());
  for (int k = 0; k < spectrum.dim(); ++k) {
    diag(k) = std::polar(1.0, phases(k));
  }
  return spectrum.eigenvectors * diag.asDiagonal() * spectrum.eigenvectors.adjoint();
}

ComplexMatrix expm_generator(const ComplexMatrix& h, double theta) {
  return expm_generator(eig_hermitian(h), theta);
}

SymmetricEigenPair max_eig_sym3(const Matrix3& m) {
  if (!m.allFinite()) {
    throw DomainError("max_eig_sym3: matrix has non-finite entries");
  }
  const double defect = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (defect > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    std::ostringstream msg;
    msg << "max_eig_sym3: matrix is not symmetric (max |M - M^T| = " << defect << ")";
    throw DomainError(msg.str());
  }
  const Matrix3 sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix3> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("max_eig_sym3: eigensolver did not converge");
  }
  Vector3 v = solver.eigenvectors().col(2);
  v.normalize();
  return {solver.eigenvalues()(2), v};
}

}  // namespace phasekit
