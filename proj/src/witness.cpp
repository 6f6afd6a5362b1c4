#include "phasekit/witness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "phasekit/csv.hpp"
#include "phasekit/errors.hpp"
#include "phasekit/metrology.hpp"

namespace phasekit {

namespace {

constexpr double kUndefined = 1e-12;

}  // namespace

SqueezingAxes SqueezingAxes::make(const SpinAxis& n1, const SpinAxis& n2, const SpinAxis& n3) {
  const double d12 = std::abs(n1.vector().dot(n2.vector()));
  const double d13 = std::abs(n1.vector().dot(n3.vector()));
  const double d23 = std::abs(n2.vector().dot(n3.vector()));
  if (d12 > 1e-10 || d13 > 1e-10 || d23 > 1e-10) {
    throw DomainError("squeezing axes must be pairwise orthogonal");
  }
  return {n1, n2, n3};
}

SqueezingAxes squeezing_axes_from_mean_spin(const State& probe) {
  const Vector3 mean = mean_spin(probe);
  if (mean.norm() < 1e-12) {
    return {SpinAxis::x(), SpinAxis::y(), SpinAxis::z()};
  }
  const Vector3 n3 = mean.normalized();
  // Any vector not parallel to n3 seeds the orthogonal plane.
  const Vector3 seed = std::abs(n3.z()) < 0.9 ? Vector3::UnitZ() : Vector3::UnitX();
  const Vector3 u = (seed - seed.dot(n3) * n3).normalized();
  const Vector3 v = n3.cross(u);
  const Matrix3 cov = spin_covariance(probe);
  Eigen::Matrix2d plane;
  plane << u.dot(cov * u), u.dot(cov * v), v.dot(cov * u), v.dot(cov * v);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(plane);
  const Eigen::Vector2d low = solver.eigenvectors().col(0);
  const Vector3 n1 = (low(0) * u + low(1) * v).normalized();
  const Vector3 n2 = n3.cross(n1);
  return SqueezingAxes::make(SpinAxis::normalized(n1), SpinAxis::normalized(n2),
                             SpinAxis::normalized(n3));
}

SqueezingReport squeezing(const State& probe, const SqueezingAxes& axes) {
  SqueezingAxes checked = SqueezingAxes::make(axes.n1, axes.n2, axes.n3);
  const int n = space_of(probe).n_particles();
  SqueezingReport report{checked, 0.0, Vector3::Zero(), std::nullopt, std::nullopt};
  report.mean_spin = mean_spin(probe);
  const Matrix3 cov = spin_covariance(probe);
  const Vector3& n1 = checked.n1.vector();
  report.variance_n1 = std::max(0.0, n1.dot(cov * n1));
  const double m2 = report.mean_spin.dot(checked.n2.vector());
  const double m3 = report.mean_spin.dot(checked.n3.vector());
  if (m3 * m3 >= kUndefined) report.xi_r_squared = n * report.variance_n1 / (m3 * m3);
  if (m2 * m2 + m3 * m3 >= kUndefined) {
    report.xi_r_prime_squared = n * report.variance_n1 / (m2 * m2 + m3 * m3);
  }
  return report;
}

bool useful_entanglement(double fisher_value, int n_particles) {
  if (n_particles < 1) throw DomainError("useful_entanglement: N must be positive");
  if (!(fisher_value >= 0.0)) throw DomainError("useful_entanglement: Fisher value must be >= 0");
  return fisher_value > n_particles;
}

std::string to_string(FisherKind kind) {
  return kind == FisherKind::Classical ? "fisher" : "quantum-fisher";
}

double k_bound(int n_particles, int k, double h_range) {
  if (n_particles < 1 || k < 1 || k > n_particles) {
    throw DomainError("k_bound: requires 1 <= k <= N");
  }
  if (!(h_range > 0.0)) throw DomainError("k_bound: h_range must be positive");
  const long long s = n_particles / k;
  const long long r = n_particles - s * k;
  const double count = static_cast<double>(s * k * k + r * r);
  return h_range * h_range * count;
}

DepthReport entanglement_depth(double fisher_value, int n_particles, double h_range,
                               FisherKind kind) {
  if (n_particles < 1) throw DomainError("entanglement_depth: N must be positive");
  if (!(h_range > 0.0)) throw DomainError("entanglement_depth: h_range must be positive");
  const double ceiling = static_cast<double>(n_particles) * n_particles * h_range * h_range;
  if (!(fisher_value >= 0.0) || fisher_value > ceiling + 1e-9) {
    std::ostringstream msg;
    msg << "entanglement_depth: Fisher value " << fisher_value << " is infeasible for N = "
        << n_particles << " (ceiling " << ceiling << ")";
    throw DomainError(msg.str());
  }
  DepthReport report;
  report.n_particles = n_particles;
  report.fisher_value = fisher_value;
  report.h_range = h_range;
  report.kind = kind;
  report.depth = n_particles;
  bool found = false;
  for (int k = 1; k <= n_particles; ++k) {
    DepthStep step;
    step.k = k;
    step.s = n_particles / k;
    step.r = n_particles - step.s * k;
    step.bound = k_bound(n_particles, k, h_range);
    report.steps.push_back(step);
    if (!found && fisher_value <= step.bound) {
      report.depth = k;
      found = true;
    }
  }
  report.useful = fisher_value > n_particles * h_range * h_range;
  return report;
}

std::optional<SqueezingFisherCheck> squeezing_fisher_check(const State& probe,
                                                           const SqueezingAxes& axes) {
  const SqueezingReport sq = squeezing(probe, axes);
  if (!sq.xi_r_squared) return std::nullopt;
  const int n = space_of(probe).n_particles();
  const double fq = qfi(probe, axes.n2);
  SqueezingFisherCheck out;
  out.lhs = fq > 0.0 ? n / fq : std::numeric_limits<double>::infinity();
  out.rhs = *sq.xi_r_squared;
  out.holds = out.lhs <= out.rhs + 1e-9 * std::max(1.0, out.rhs);
  return out;
}

void write_staircase_csv(std::ostream& out, const DepthReport& report) {
  out << "k,s,r,bound\n";
  for (const DepthStep& step : report.steps) {
    out << step.k << ',' << step.s << ',' << step.r << ',' << format_number(step.bound) << '\n';
  }
}

}  // namespace phasekit
