#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phasekit/probes.hpp"
#include "phasekit/spinspace.hpp"

namespace phasekit {

/// Orthonormal triple (n1, n2, n3): n1 carries the variance, n3 the mean
/// spin and n2 is the rotation axis.
struct SqueezingAxes {
  SpinAxis n1;
  SpinAxis n2;
  SpinAxis n3;

  /// Throws DomainError unless the axes are pairwise orthogonal within 1e-10.
  static SqueezingAxes make(const SpinAxis& n1, const SpinAxis& n2, const SpinAxis& n3);
};

/// n3 along the mean spin, n1 the direction of least variance orthogonal to
/// it and n2 = n3 x n1. With a vanishing mean spin the triple is (x, y, z).
SqueezingAxes squeezing_axes_from_mean_spin(const State& probe);

struct SqueezingReport {
  SqueezingAxes axes;
  double variance_n1 = 0.0;
  Vector3 mean_spin = Vector3::Zero();
  /// N (Delta J_n1)^2 / <J_n3>^2; empty when <J_n3>^2 < 1e-12.
  std::optional<double> xi_r_squared;
  /// N (Delta J_n1)^2 / (<J_n2>^2 + <J_n3>^2); empty when the denominator is < 1e-12.
  std::optional<double> xi_r_prime_squared;
};

SqueezingReport squeezing(const State& probe, const SqueezingAxes& axes);

/// F > N.
bool useful_entanglement(double fisher_value, int n_particles);

/// Which information a witness consumed. A classical F above N implies the
/// same for F_Q, not conversely.
enum class FisherKind { Classical, Quantum };

std::string to_string(FisherKind kind);

/// h^2 (s k^2 + r^2), s = floor(N/k), r = N - s k.
double k_bound(int n_particles, int k, double h_range = 1.0);

struct DepthStep {
  int k = 0;
  int s = 0;
  int r = 0;
  double bound = 0.0;
};

struct DepthReport {
  int n_particles = 0;
  double fisher_value = 0.0;
  double h_range = 1.0;
  FisherKind kind = FisherKind::Quantum;
  std::vector<DepthStep> steps;
  /// Smallest k with fisher_value <= k_bound(N, k).
  int depth = 1;
  bool useful = false;
};

/// Throws DomainError for negative values or values above N^2 h^2 + 1e-9.
DepthReport entanglement_depth(double fisher_value, int n_particles, double h_range = 1.0,
                               FisherKind kind = FisherKind::Quantum);

struct SqueezingFisherCheck {
  double lhs = 0.0;  // N / F_Q[rho, J_n2]
  double rhs = 0.0;  // xi_R^2
  bool holds = false;
};

/// Empty when xi_R^2 is undefined for the axes.
std::optional<SqueezingFisherCheck> squeezing_fisher_check(const State& probe,
                                                           const SqueezingAxes& axes);

/// CSV with header "k,s,r,bound".
void write_staircase_csv(std::ostream& out, const DepthReport& report);

}  // namespace phasekit
