#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phasekit/metrology.hpp"

namespace phasekit {

/// Closed interval [lo, hi] of phase values, radians.
struct Domain {
  double lo;
  double hi;

  double width() const { return hi - lo; }
  bool contains(double phi) const { return phi >= lo && phi <= hi; }
};

/// Throws DomainError unless lo < hi and both are finite.
void validate(const Domain& domain);

/// m i.i.d. outcomes drawn at theta_true.
struct OutcomeSample {
  double theta_true = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t outcome_count = 0;
  std::vector<int> outcomes;
};

/// Inverse-CDF sampling on the outcome table with a Philox4x32 stream
/// (seed, stream). Deterministic in (model, theta_true, m, seed, stream).
OutcomeSample sample(const ProbabilityModel& model, double theta_true, int m, std::uint64_t seed,
                     std::uint64_t stream = 0);

/// Histogram of outcome ids; throws DomainError on an id outside [0, outcome_count).
std::vector<int> outcome_counts(const std::vector<int>& outcomes, std::size_t outcome_count);

inline constexpr double kLikelihoodFloor = 1e-12;

/// sum_i ln max(P(eps_i | phi), p_floor).
double log_likelihood(const ProbabilityModel& model, const std::vector<int>& outcomes, double phi,
                      double p_floor = kLikelihoodFloor);

/// Same from a histogram of outcome counts.
double log_likelihood_counts(const std::vector<double>& probabilities,
                             const std::vector<int>& counts, double p_floor = kLikelihoodFloor);

struct MleOptions {
  int grid_points = 512;
  double refine_tol = 1e-7;
  double p_floor = kLikelihoodFloor;
};

struct MleResult {
  double estimate = 0.0;
  double log_likelihood = 0.0;
  /// Maximum sits on a domain edge (within refine_tol).
  bool on_boundary = false;
};

/// Grid search over the closed domain followed by golden-section refinement
/// inside the bracketing grid cells.
MleResult mle(const ProbabilityModel& model, const std::vector<int>& outcomes, const Domain& domain,
              const MleOptions& options = {});

/// Monte-Carlo statistics of an estimator at a fixed true phase.
struct EstimationReport {
  std::string estimator;
  double theta_true = 0.0;
  int m = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> estimates;
  double mean = 0.0;
  /// Unbiased sample variance.
  double variance = 0.0;
  /// sqrt(variance / trials).
  double standard_error = 0.0;
  /// 1 / (m F(theta_true)).
  double crlb = 0.0;
  /// Trials whose estimate was flagged (boundary MLE, out-of-range moment).
  std::size_t flagged = 0;
};

struct MonteCarloOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Trial t uses the random stream (seed, t); results do not depend on the
/// thread count.
EstimationReport mle_monte_carlo(const ProbabilityModel& model, double theta_true, int m,
                                 const Domain& domain, const MonteCarloOptions& mc,
                                 const MleOptions& options = {});

/// Prior density on the posterior grid. An empty function is the flat prior.
struct Prior {
  std::string tag = "flat";
  std::function<double(double)> density;

  static Prior flat() { return {}; }
};

struct PosteriorDistribution {
  std::vector<double> grid;
  std::vector<double> density;
  std::string prior_tag;

  double integral() const;
  /// Integral of the piecewise-linear interpolant over [a, b] clipped to the grid.
  double mass(double a, double b) const;
};

inline constexpr int kPosteriorGridPoints = 2048;

/// P(phi | eps) on a uniform grid spanning the closed domain, computed in
/// log space with the maximum subtracted and normalized by the trapezoid
/// rule. Throws NumericalError when every grid value underflows.
PosteriorDistribution bayes_posterior(const ProbabilityModel& model,
                                      const std::vector<int>& outcomes, const Domain& domain,
                                      const Prior& prior = {},
                                      int grid_points = kPosteriorGridPoints);

enum class PointEstimate { Mean, Map };

struct PosteriorSummary {
  double mean = 0.0;
  double map = 0.0;
  double variance = 0.0;
  double credible_mass = 0.0;
  /// Half width of the symmetric interval around the chosen point estimate
  /// holding credible_mass.
  double credible_half_width = 0.0;
};

PosteriorSummary posterior_summaries(const PosteriorDistribution& post, double mass = 0.6827,
                                     PointEstimate centre = PointEstimate::Mean);

/// Half width Delta with mass([c - Delta, c + Delta]) = mass, by bisection.
double credible_half_width(const PosteriorDistribution& post, double centre, double mass);

struct BayesBound {
  /// 1 / G.
  double bound = 0.0;
  /// G = int (dP/dphi)^2 / P dphi.
  double g = 0.0;
  /// The posterior does not vanish at the domain edges (density above
  /// 1e-8 of its peak there), so the bound is not guaranteed.
  bool border_flag = false;
};

/// Derivatives by finite differences on the grid; grid points with
/// P < 1e-14 max P are skipped.
BayesBound bayes_variance_bound(const PosteriorDistribution& post);

struct BayesMonteCarloReport {
  /// Estimates are posterior means.
  EstimationReport report;
  /// Average posterior variance over trials.
  double mean_posterior_variance = 0.0;
  /// Average of G over trials.
  double mean_g = 0.0;
  /// 1 / <G>, the averaged lower bound on the average posterior variance.
  double averaged_bound = 0.0;
  /// Trials with a border_flag.
  std::size_t border_flagged = 0;
};

BayesMonteCarloReport bayes_monte_carlo(const ProbabilityModel& model, double theta_true, int m,
                                        const Domain& domain, const MonteCarloOptions& mc,
                                        const Prior& prior = {},
                                        int grid_points = kPosteriorGridPoints);

struct MomentsOptions {
  /// Grid used to check strict monotonicity of f over the domain.
  int check_points = 257;
  double tolerance = 1e-12;
};

struct MomentsResult {
  double estimate = 0.0;
  /// (Delta M)^2 / (m (d<M>/dtheta)^2) at the estimate.
  double variance_prediction = 0.0;
  double sample_mean = 0.0;
};

/// Value c(eps) of the observable on each outcome; M = sum c(eps) E(eps)
/// must hold within 1e-10, else DomainError.
std::vector<double> observable_values(const ProbabilityModel& model,
                                      const ComplexMatrix& observable);

/// f(phi) = sum c(eps) P(eps | phi).
double moment_mean(const ProbabilityModel& model, const std::vector<double>& values, double phi);

/// Predicted single-run variance of the moment estimator at phi for m shots.
double moments_prediction(const ProbabilityModel& model, const std::vector<double>& values,
                          double phi, int m);

/// Inverts the sample mean of the observable by bisection. Throws
/// DomainError when f is not strictly monotone on the domain and
/// OutOfRangeError when the sample mean lies outside f(domain).
MomentsResult method_of_moments(const ProbabilityModel& model, const std::vector<double>& values,
                                const std::vector<int>& outcomes, const Domain& domain,
                                const MomentsOptions& options = {});

MomentsResult method_of_moments(const ProbabilityModel& model, const ComplexMatrix& observable,
                                const std::vector<int>& outcomes, const Domain& domain,
                                const MomentsOptions& options = {});

struct MomentsMonteCarloReport {
  EstimationReport report;
  /// Prediction at theta_true.
  double predicted_variance = 0.0;
};

/// Out-of-range trials are clamped to the nearer domain edge and counted
/// in report.flagged.
MomentsMonteCarloReport moments_monte_carlo(const ProbabilityModel& model,
                                            const std::vector<double>& values, double theta_true,
                                            int m, const Domain& domain,
                                            const MonteCarloOptions& mc,
                                            const MomentsOptions& options = {});

/// sum P(eps|theta) ln(P(eps|theta) / P(eps|phi)); +infinity when some
/// outcome has P(eps|theta) > p_floor but P(eps|phi) <= p_floor.
double kl_divergence(const ProbabilityModel& model, double theta, double phi,
                     double p_floor = kLikelihoodFloor);

/// CSV with header "trial,estimate".
void write_estimates_csv(std::ostream& out, const EstimationReport& report);
/// CSV with header "grid_phi,posterior_density".
void write_posterior_csv(std::ostream& out, const PosteriorDistribution& post);

}  // namespace phasekit
