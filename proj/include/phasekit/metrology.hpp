#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phasekit/numerics.hpp"
#include "phasekit/probes.hpp"
#include "phasekit/spinspace.hpp"

namespace phasekit {

/// Positive-operator valued measure. Outcome ids are the element indices.
class Povm {
 public:
  /// Throws DomainError unless every element is Hermitian and PSD within
  /// 1e-10 and the elements sum to the identity within 1e-10.
  explicit Povm(std::vector<ComplexMatrix> elements, std::vector<std::string> labels = {});

  std::size_t size() const { return elements_.size(); }
  int dim() const { return static_cast<int>(elements_.front().rows()); }
  const ComplexMatrix& element(std::size_t outcome) const { return elements_.at(outcome); }
  const std::string& label(std::size_t outcome) const { return labels_.at(outcome); }
  const std::vector<ComplexMatrix>& elements() const { return elements_; }

  double completeness_defect() const;
  /// Every element is diagonal in the Dicke basis.
  bool diagonal() const { return diagonal_; }

 private:
  std::vector<ComplexMatrix> elements_;
  std::vector<std::string> labels_;
  bool diagonal_ = false;
};

/// Projectors |j,mu><j,mu| on the Dicke basis; outcome id = basis index.
Povm povm_number_counting(const SpinSpace& space);

/// {|psi0><psi0|, 1 - |psi0><psi0|}; outcome 0 is "found in the probe".
Povm povm_probe_projection(const PureState& probe);

/// theta -> P(eps | theta) = Tr[E(eps) exp(-i theta J_n) rho exp(+i theta J_n)].
///
/// Immutable after construction; every member is safe to call concurrently.
class ProbabilityModel {
 public:
  ProbabilityModel(State probe, SpinAxis axis, Povm povm);

  const State& probe() const { return probe_; }
  const SpinAxis& axis() const { return axis_; }
  const Povm& povm() const { return povm_; }
  const SpinSpace& space() const { return space_of(probe_); }
  std::size_t outcome_count() const { return povm_.size(); }
  /// J_n.
  const ComplexMatrix& generator() const { return generator_; }

  ComplexMatrix evolved(double theta) const;

  /// Probabilities in outcome order; round-off negatives are clamped to 0.
  std::vector<double> probabilities(double theta) const;
  /// dP/dtheta from d rho/d theta = -i [J_n, rho(theta)].
  std::vector<double> derivative(double theta) const;
  /// d^2P/dtheta^2 from -[J_n, [J_n, rho(theta)]].
  std::vector<double> second_derivative(double theta) const;

 private:
  std::vector<double> traces(const ComplexMatrix& m) const;

  State probe_;
  SpinAxis axis_;
  Povm povm_;
  ComplexMatrix rho0_;
  ComplexMatrix generator_;
  SpectralDecomposition generator_spectrum_;
};

enum class ContributionMethod { Direct, LimitRule, Excluded };

struct FisherOptions {
  double p_floor = 1e-12;
  double d_floor = 1e-9;
  /// Probabilities below this are indistinguishable from round-off zeros.
  double zero_resolution = 1e-14;
};

struct FisherReport {
  double theta = 0.0;
  double fi = 0.0;
  std::vector<double> contributions;
  std::vector<ContributionMethod> methods;
  /// Some outcome had P <= p_floor and was evaluated by the limit rule.
  bool limit_point = false;
  std::string derivative_method = "analytic-commutator";
};

/// F(theta) = sum (dP/dtheta)^2 / P. Outcomes with P <= p_floor that sit at a
/// quadratic zero (or whose P is below zero_resolution) contribute their
/// de l'Hopital limit 2 d^2P/dtheta^2, since zero-probability minima carry
/// finite information; limits below d_floor are excluded.
FisherReport fisher_information(const ProbabilityModel& model, double theta,
                                const FisherOptions& options = {});

/// <op^2> - <op>^2 for a Hermitian operator.
double variance(const State& state, const ComplexMatrix& op);

/// 4 (Delta J_n)^2.
double qfi_pure(const PureState& probe, const SpinAxis& axis);

/// 2 sum (p_k - p_k')^2/(p_k + p_k') |<k|H|k'>|^2 over p_k + p_k' > p_floor,
/// for a probe with the given spectrum and an arbitrary Hermitian generator.
double qfi_unitary(const SpectralDecomposition& spectrum, const ComplexMatrix& generator,
                   double p_floor = 1e-12);

/// QFI of a density matrix under J_n. Falls back to qfi_pure when the
/// largest eigenvalue exceeds 1 - 1e-12.
double qfi_mixed(const MixedState& probe, const SpinAxis& axis, double p_floor = 1e-12);

double qfi(const State& probe, const SpinAxis& axis);

/// SLD L_0 solving {rho, L_0} = 2i [rho, H] on the supported block, with
/// elements 2i (p_k - p_k')/(p_k + p_k') <k|H|k'> in the eigenbasis of rho.
ComplexMatrix sld_unitary(const SpectralDecomposition& spectrum, const ComplexMatrix& generator,
                          double p_floor = 1e-12);
ComplexMatrix sld(const MixedState& probe, const SpinAxis& axis, double p_floor = 1e-12);

/// max |{rho, L} - 2i [rho, H]| over eigenbasis entries with p_k + p_k' > p_floor.
double sld_equation_residual(const SpectralDecomposition& spectrum, const ComplexMatrix& generator,
                             const ComplexMatrix& sld, double p_floor = 1e-12);

using StateFamily = std::function<MixedState(double)>;

struct FamilyOptions {
  double step = 1e-5;
  double p_floor = 1e-12;
  /// Eigenvalues closer than this are treated as one degenerate block.
  double cluster_tol = 1e-8;
};

/// QFI of an arbitrary smooth family rho(theta) from its spectral data:
/// sum (d p_k)^2/p_k + 2 sum (p_k - p_k')^2/(p_k + p_k') |<d k|k'>|^2, with
/// derivatives by central differences. Eigenvectors at theta +/- step are
/// aligned to those at theta block by block (phase for simple eigenvalues,
/// orthogonal Procrustes for degenerate blocks). Throws NumericalError when
/// an eigenvalue moves past half the gap to a neighbouring block.
double qfi_family(const StateFamily& family, double theta, const FamilyOptions& options = {});

double bound_shot_noise(int n_particles, int m, double h_range = 1.0);
double bound_heisenberg(int n_particles, int m, double h_range = 1.0);
/// 1 / sqrt(m F_Q).
double quantum_cramer_rao(double qfi_value, int m);

/// Ehrenfest-type lower bound |<[M, H]>|^2 / (Delta M)^2 on F(theta).
/// M must commute with every POVM element. Returns nullopt when the variance
/// of M vanishes (bound undefined).
std::optional<double> fisher_lower_bound_moment(const ProbabilityModel& model, double theta,
                                                const ComplexMatrix& observable);

/// |<[H, U]>|^2 for a unitary U diagonal in the POVM basis.
double fisher_lower_bound_unitary(const ProbabilityModel& model, double theta,
                                  const ComplexMatrix& unitary);

/// Diagnostic for estimator efficiency on a single shot: max over outcomes of
/// |dL/dtheta - lambda (Theta(eps) - <Theta>)| with lambda = F / d<Theta>/dtheta.
/// A zero residual means the estimator saturates the Cramer-Rao bound at theta.
double crlb_saturation_residual(const ProbabilityModel& model, double theta,
                                const std::vector<double>& estimator_values);

struct OptimalAxis {
  SpinAxis axis;
  double qfi_max;
};

/// Direction maximizing F_Q[rho, J_n]: the top eigenvector of the covariance
/// matrix gamma_C (pure) or of Gamma_C (mixed); the maximum is 4 lambda_max.
OptimalAxis optimal_axis(const State& probe);

}  // namespace phasekit
