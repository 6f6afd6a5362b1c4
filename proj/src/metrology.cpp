#include "phasekit/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "phasekit/errors.hpp"

namespace phasekit {

namespace {

constexpr double kPovmTolerance = 1e-10;

double trace_product(const ComplexMatrix& e, const ComplexMatrix& m) {
  // Tr[E M] without forming the product.
  return e.cwiseProduct(m.transpose()).sum().real();
}

// <k|H|k'> for all pairs, in the eigenbasis of the probe.
ComplexMatrix in_eigenbasis(const SpectralDecomposition& spectrum, const ComplexMatrix& op) {
  return spectrum.eigenvectors.adjoint() * op * spectrum.eigenvectors;
}

void check_generator(const SpectralDecomposition& spectrum, const ComplexMatrix& generator) {
  if (generator.rows() != spectrum.dim() || generator.cols() != spectrum.dim()) {
    throw DomainError("generator dimension does not match the state");
  }
}

}  // namespace

Povm::Povm(std::vector<ComplexMatrix> elements, std::vector<std::string> labels)
    : elements_(std::move(elements)), labels_(std::move(labels)) {
  if (elements_.empty()) {
    throw DomainError("Povm: no elements");
  }
  const Eigen::Index dim = elements_.front().rows();
  if (labels_.empty()) {
    for (std::size_t i = 0; i < elements_.size(); ++i) labels_.push_back(std::to_string(i));
  }
  if (labels_.size() != elements_.size()) {
    throw DomainError("Povm: label count does not match element count");
  }
  diagonal_ = true;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const ComplexMatrix& e = elements_[i];
    if (e.rows() != dim || e.cols() != dim) {
      throw DomainError("Povm: elements have inconsistent dimensions");
    }
    if (hermiticity_defect(e) > kPovmTolerance) {
      throw DomainError("Povm: element " + labels_[i] + " is not Hermitian");
    }
    const SpectralDecomposition spec = eig_hermitian(e, kPovmTolerance);
    if (spec.eigenvalues.minCoeff() < -kPovmTolerance) {
      throw DomainError("Povm: element " + labels_[i] + " is not positive semidefinite");
    }
    ComplexMatrix off = e;
    off.diagonal().setZero();
    if (max_abs(off) > 1e-15) diagonal_ = false;
  }
  const double defect = completeness_defect();
  if (defect > kPovmTolerance) {
    std::ostringstream msg;
    msg << "Povm: elements do not sum to the identity (defect " << defect << ")";
    throw DomainError(msg.str());
  }
}

double Povm::completeness_defect() const {
  const Eigen::Index dim = elements_.front().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  for (const auto& e : elements_) sum += e;
  return max_abs(sum - ComplexMatrix::Identity(dim, dim));
}

Povm povm_number_counting(const SpinSpace& space) {
  std::vector<ComplexMatrix> elements;
  std::vector<std::string> labels;
  for (int i = 0; i < space.dim(); ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(space.dim(), space.dim());
    e(i, i) = 1.0;
    elements.push_back(std::move(e));
    std::ostringstream label;
    label << space.mu_at(i).value();
    labels.push_back(label.str());
  }
  return Povm(std::move(elements), std::move(labels));
}

Povm povm_probe_projection(const PureState& probe) {
  const int dim = probe.space().dim();
  const ComplexMatrix proj = probe.density();
  ComplexMatrix rest = ComplexMatrix::Identity(dim, dim) - proj;
  return Povm({proj, rest}, {"probe", "orthogonal"});
}

ProbabilityModel::ProbabilityModel(State probe, SpinAxis axis, Povm povm)
    : probe_(std::move(probe)),
      axis_(axis),
      povm_(std::move(povm)),
      rho0_(density_of(probe_)),
      generator_(op_j(space_of(probe_), axis_)),
      generator_spectrum_(eig_hermitian(generator_)) {
  if (povm_.dim() != space_of(probe_).dim()) {
    throw DomainError("ProbabilityModel: POVM dimension does not match the probe");
  }
}

ComplexMatrix ProbabilityModel::evolved(double theta) const {
  const ComplexMatrix u = expm_generator(generator_spectrum_, theta);
  return u * rho0_ * u.adjoint();
}

std::vector<double> ProbabilityModel::traces(const ComplexMatrix& m) const {
  std::vector<double> out(povm_.size());
  for (std::size_t i = 0; i < povm_.size(); ++i) {
    const ComplexMatrix& e = povm_.element(i);
    out[i] = povm_.diagonal() ? e.diagonal().cwiseProduct(m.diagonal()).sum().real()
                              : trace_product(e, m);
  }
  return out;
}

std::vector<double> ProbabilityModel::probabilities(double theta) const {
  std::vector<double> p = traces(evolved(theta));
  for (double& v : p) v = std::max(v, 0.0);
  return p;
}

std::vector<double> ProbabilityModel::derivative(double theta) const {
  const ComplexMatrix rho = evolved(theta);
  return traces(Complex(0.0, -1.0) * commutator(generator_, rho));
}

std::vector<double> ProbabilityModel::second_derivative(double theta) const {
  const ComplexMatrix rho = evolved(theta);
  return traces(-commutator(generator_, commutator(generator_, rho)));
}

FisherReport fisher_information(const ProbabilityModel& model, double theta,
                                const FisherOptions& options) {
  FisherReport report;
  report.theta = theta;
  const std::vector<double> p = model.probabilities(theta);
  const std::vector<double> dp = model.derivative(theta);
  std::vector<double> d2p;
  report.contributions.assign(p.size(), 0.0);
  report.methods.assign(p.size(), ContributionMethod::Excluded);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > options.p_floor) {
      report.contributions[i] = dp[i] * dp[i] / p[i];
      report.methods[i] = ContributionMethod::Direct;
      continue;
    }
    // Near a quadratic zero P ~ P''/2 (t - t0)^2, so (P')^2 / P -> 2 P''. The
    // local parabola reaches zero when P - (P')^2 / (2 P'') vanishes; a small
    // but resolved P away from such a zero keeps the direct ratio.
    if (d2p.empty()) d2p = model.second_derivative(theta);
    const double limit = 2.0 * d2p[i];
    const bool at_zero = d2p[i] > 0.0 && p[i] - dp[i] * dp[i] / limit <= options.zero_resolution;
    if (!at_zero && p[i] > options.zero_resolution) {
      report.contributions[i] = dp[i] * dp[i] / p[i];
      report.methods[i] = ContributionMethod::Direct;
    } else if (limit > options.d_floor) {
      report.contributions[i] = limit;
      report.methods[i] = ContributionMethod::LimitRule;
      report.limit_point = true;
    }
  }
  for (double c : report.contributions) report.fi += c;
  return report;
}

double variance(const State& state, const ComplexMatrix& op) {
  const ComplexMatrix rho = density_of(state);
  const double mean = (rho * op).trace().real();
  const double second = (rho * op * op).trace().real();
  return std::max(0.0, second - mean * mean);
}

double qfi_pure(const PureState& probe, const SpinAxis& axis) {
  const ComplexMatrix h = op_j(probe.space(), axis);
  const ComplexVector hv = h * probe.amplitudes();
  const double mean = probe.amplitudes().dot(hv).real();
  return 4.0 * std::max(0.0, hv.squaredNorm() - mean * mean);
}

double qfi_unitary(const SpectralDecomposition& spectrum, const ComplexMatrix& generator,
                   double p_floor) {
  check_generator(spectrum, generator);
  const ComplexMatrix hk = in_eigenbasis(spectrum, generator);
  const RealVector& p = spectrum.eigenvalues;
  double sum = 0.0;
  for (int k = 0; k < spectrum.dim(); ++k) {
    for (int l = k + 1; l < spectrum.dim(); ++l) {
      const double s = p(k) + p(l);
      if (s <= p_floor) continue;
      const double d = p(k) - p(l);
      sum += d * d / s * std::norm(hk(k, l));
    }
  }
  // Each unordered pair appears twice in the full double sum.
  return 4.0 * sum;
}

double qfi_mixed(const MixedState& probe, const SpinAxis& axis, double p_floor) {
  if (probe.effectively_pure()) return qfi_pure(probe.dominant(), axis);
  return qfi_unitary(probe.spectrum(), op_j(probe.space(), axis), p_floor);
}

double qfi(const State& probe, const SpinAxis& axis) {
  if (const auto* pure = std::get_if<PureState>(&probe)) return qfi_pure(*pure, axis);
  return qfi_mixed(std::get<MixedState>(probe), axis);
}

ComplexMatrix sld_unitary(const SpectralDecomposition& spectrum, const ComplexMatrix& generator,
                          double p_floor) {
  check_generator(spectrum, generator);
  const ComplexMatrix hk = in_eigenbasis(spectrum, generator);
  const RealVector& p = spectrum.eigenvalues;
  const int dim = spectrum.dim();
  ComplexMatrix l = ComplexMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    for (int m = 0; m < dim; ++m) {
      const double s = p(k) + p(m);
      if (s <= p_floor) continue;
      l(k, m) = Complex(0.0, 2.0) * ((p(k) - p(m)) / s) * hk(k, m);
    }
  }
  return spectrum.eigenvectors * l * spectrum.eigenvectors.adjoint();
}

ComplexMatrix sld(const MixedState& probe, const SpinAxis& axis, double p_floor) {
  return sld_unitary(probe.spectrum(), op_j(probe.space(), axis), p_floor);
}

double sld_equation_residual(const SpectralDecomposition& spectrum, const ComplexMatrix& generator,
                             const ComplexMatrix& sld_op, double p_floor) {
  check_generator(spectrum, generator);
  const ComplexMatrix rho = spectrum.reconstruct();
  const ComplexMatrix lhs = anticommutator(rho, sld_op);
  const ComplexMatrix rhs = Complex(0.0, 2.0) * commutator(rho, generator);
  const ComplexMatrix diff = in_eigenbasis(spectrum, lhs - rhs);
  const RealVector& p = spectrum.eigenvalues;
  double worst = 0.0;
  for (int k = 0; k < spectrum.dim(); ++k) {
    for (int m = 0; m < spectrum.dim(); ++m) {
      if (p(k) + p(m) > p_floor) worst = std::max(worst, std::abs(diff(k, m)));
    }
  }
  return worst;
}

namespace {

constexpr double kMinAlignment = 0.5;

struct Cluster {
  int begin;
  int end;  // exclusive
};

std::vector<Cluster> clusters_of(const RealVector& values, double tol) {
  std::vector<Cluster> out;
  int start = 0;
  for (int i = 1; i <= values.size(); ++i) {
    if (i == values.size() || values(i) - values(i - 1) > tol) {
      out.push_back({start, i});
      start = i;
    }
  }
  return out;
}

// Re-gauges the eigenvectors of `shifted` so that each block is as close as
// possible to the matching block of `base`.
void align_to(const SpectralDecomposition& base, SpectralDecomposition& shifted,
              const std::vector<Cluster>& clusters) {
  const RealVector& p = base.eigenvalues;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const Cluster& cl = clusters[c];
    const double lo = p(cl.begin);
    const double hi = p(cl.end - 1);
    const double gap_below =
        c == 0 ? std::numeric_limits<double>::infinity() : lo - p(clusters[c - 1].end - 1);
    const double gap_above = c + 1 == clusters.size() ? std::numeric_limits<double>::infinity()
                                                      : p(clusters[c + 1].begin) - hi;
    for (int i = cl.begin; i < cl.end; ++i) {
      const double v = shifted.eigenvalues(i);
      if (v - hi >= 0.5 * gap_above || lo - v >= 0.5 * gap_below) {
        throw NumericalError("qfi_family: eigenvalue crossing within the difference step");
      }
    }
    const int width = cl.end - cl.begin;
    auto target = base.eigenvectors.middleCols(cl.begin, width);
    auto block = shifted.eigenvectors.middleCols(cl.begin, width);
    // Sorted eigenvalues hide a swap; the eigenvectors do not.
    const char* swapped = "qfi_family: eigenvectors exchanged within the difference step";
    if (width == 1) {
      const Complex overlap = block.col(0).dot(target.col(0));
      if (std::abs(overlap) < kMinAlignment) throw NumericalError(swapped);
      block.col(0) *= overlap / std::abs(overlap);
      continue;
    }
    const ComplexMatrix m = block.adjoint() * target;
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues().minCoeff() < kMinAlignment) throw NumericalError(swapped);
    const ComplexMatrix r = svd.matrixU() * svd.matrixV().adjoint();
    const ComplexMatrix aligned = block * r;
    block = aligned;
  }
}

}  // namespace

double qfi_family(const StateFamily& family, double theta, const FamilyOptions& options) {
  if (!(options.step > 0.0)) {
    throw DomainError("qfi_family: step must be positive");
  }
  const MixedState centre = family(theta);
  const MixedState plus_state = family(theta + options.step);
  const MixedState minus_state = family(theta - options.step);
  const SpectralDecomposition& base = centre.spectrum();
  SpectralDecomposition plus = plus_state.spectrum();
  SpectralDecomposition minus = minus_state.spectrum();
  if (plus.dim() != base.dim() || minus.dim() != base.dim()) {
    throw DomainError("qfi_family: family changes dimension");
  }
  const std::vector<Cluster> clusters = clusters_of(base.eigenvalues, options.cluster_tol);
  align_to(base, plus, clusters);
  align_to(base, minus, clusters);

  const double inv = 1.0 / (2.0 * options.step);
  const RealVector& p = base.eigenvalues;
  const RealVector dp = (plus.eigenvalues - minus.eigenvalues) * inv;
  const ComplexMatrix dv = (plus.eigenvectors - minus.eigenvectors) * inv;

  double classical = 0.0;
  for (int k = 0; k < base.dim(); ++k) {
    if (p(k) > options.p_floor) classical += dp(k) * dp(k) / p(k);
  }
  double quantum = 0.0;
  for (int k = 0; k < base.dim(); ++k) {
    for (int l = 0; l < base.dim(); ++l) {
      if (k == l) continue;
      const double s = p(k) + p(l);
      if (s <= options.p_floor) continue;
      const double d = p(k) - p(l);
      if (d == 0.0) continue;
      // |<dk|l>| = |<k|dl>|; differentiate whichever vector carries more weight.
      const int moved = p(k) >= p(l) ? k : l;
      const int fixed = moved == k ? l : k;
      const Complex overlap = dv.col(moved).dot(base.eigenvectors.col(fixed));
      quantum += d * d / s * std::norm(overlap);
    }
  }
  return classical + 2.0 * quantum;
}

double bound_shot_noise(int n_particles, int m, double h_range) {
  if (n_particles < 1 || m < 1 || !(h_range > 0.0)) {
    throw DomainError("bound_shot_noise: requires N >= 1, m >= 1, h_range > 0");
  }
  return 1.0 / (std::sqrt(static_cast<double>(n_particles) * m) * h_range);
}

double bound_heisenberg(int n_particles, int m, double h_range) {
  if (n_particles < 1 || m < 1 || !(h_range > 0.0)) {
    throw DomainError("bound_heisenberg: requires N >= 1, m >= 1, h_range > 0");
  }
  return 1.0 / (n_particles * std::sqrt(static_cast<double>(m)) * h_range);
}

double quantum_cramer_rao(double qfi_value, int m) {
  if (m < 1 || !(qfi_value >= 0.0)) {
    throw DomainError("quantum_cramer_rao: requires m >= 1 and a non-negative QFI");
  }
  if (qfi_value == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(m * qfi_value);
}

std::optional<double> fisher_lower_bound_moment(const ProbabilityModel& model, double theta,
                                                const ComplexMatrix& observable) {
  const int dim = model.space().dim();
  if (observable.rows() != dim || observable.cols() != dim) {
    throw DomainError("fisher_lower_bound_moment: observable dimension mismatch");
  }
  if (hermiticity_defect(observable) > kPovmTolerance) {
    throw DomainError("fisher_lower_bound_moment: observable is not Hermitian");
  }
  for (const auto& e : model.povm().elements()) {
    if (max_abs(commutator(observable, e)) > kPovmTolerance) {
      throw DomainError("fisher_lower_bound_moment: observable is not diagonal in the POVM basis");
    }
  }
  const ComplexMatrix rho = model.evolved(theta);
  const double mean = (rho * observable).trace().real();
  const double var = (rho * observable * observable).trace().real() - mean * mean;
  if (var <= 1e-12) return std::nullopt;
  const Complex c = (rho * commutator(observable, model.generator())).trace();
  return std::norm(c) / var;
}

double fisher_lower_bound_unitary(const ProbabilityModel& model, double theta,
                                  const ComplexMatrix& unitary) {
  const int dim = model.space().dim();
  if (unitary.rows() != dim || unitary.cols() != dim) {
    throw DomainError("fisher_lower_bound_unitary: dimension mismatch");
  }
  if (unitarity_defect(unitary) > kPovmTolerance) {
    throw DomainError("fisher_lower_bound_unitary: operator is not unitary");
  }
  const ComplexMatrix rho = model.evolved(theta);
  return std::norm((rho * commutator(model.generator(), unitary)).trace());
}

double crlb_saturation_residual(const ProbabilityModel& model, double theta,
                                const std::vector<double>& estimator_values) {
  if (estimator_values.size() != model.outcome_count()) {
    throw DomainError("crlb_saturation_residual: one estimator value per outcome required");
  }
  const std::vector<double> p = model.probabilities(theta);
  const std::vector<double> dp = model.derivative(theta);
  const FisherReport fr = fisher_information(model, theta);
  double mean = 0.0;
  double dmean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mean += estimator_values[i] * p[i];
    dmean += estimator_values[i] * dp[i];
  }
  if (std::abs(dmean) < 1e-300) return std::numeric_limits<double>::infinity();
  const double lambda = fr.fi / dmean;
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= FisherOptions{}.p_floor) continue;
    const double score = dp[i] / p[i];
    worst = std::max(worst, std::abs(score - lambda * (estimator_values[i] - mean)));
  }
  return worst;
}

OptimalAxis optimal_axis(const State& probe) {
  const SpinSpace& space = space_of(probe);
  Matrix3 gamma;
  const MixedState* mixed = std::get_if<MixedState>(&probe);
  if (mixed == nullptr || mixed->effectively_pure()) {
    gamma = spin_covariance(mixed == nullptr ? probe : State(mixed->dominant()));
  } else {
    const SpectralDecomposition& spec = mixed->spectrum();
    const ComplexMatrix ops[3] = {in_eigenbasis(spec, op_jx(space)),
                                  in_eigenbasis(spec, op_jy(space)),
                                  in_eigenbasis(spec, op_jz(space))};
    const RealVector& p = spec.eigenvalues;
    gamma.setZero();
    for (int k = 0; k < spec.dim(); ++k) {
      for (int l = 0; l < spec.dim(); ++l) {
        const double s = p(k) + p(l);
        if (s <= 1e-12) continue;
        const double w = 0.5 * (p(k) - p(l)) * (p(k) - p(l)) / s;
        if (w == 0.0) continue;
        for (int a = 0; a < 3; ++a) {
          for (int b = 0; b < 3; ++b) {
            gamma(a, b) += w * (ops[a](l, k) * ops[b](k, l)).real();
          }
        }
      }
    }
    gamma = 0.5 * (gamma + gamma.transpose()).eval();
  }
  const SymmetricEigenPair top = max_eig_sym3(gamma);
  return {SpinAxis::normalized(top.vector), 4.0 * std::max(0.0, top.value)};
}

}  // namespace phasekit
