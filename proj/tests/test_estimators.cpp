#include <doctest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "phasekit/errors.hpp"
#include "phasekit/estimators.hpp"

using namespace phasekit;

namespace {
constexpr double kPi = std::numbers::pi;

ProbabilityModel qubit_model() {
  const SpinSpace s(1);
  return ProbabilityModel(fock(s, HalfInt::from_twice(1)), SpinAxis::y(), povm_number_counting(s));
}

PosteriorDistribution gaussian_posterior(double mu, double sigma, double lo, double hi, int points) {
  PosteriorDistribution p;
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    p.grid.push_back(x);
    p.density.push_back(oracle::gaussian(x, mu, sigma));
  }
  p.prior_tag = "flat";
  return p;
}

std::vector<int> repeat(int up, int down) {
  std::vector<int> v(static_cast<std::size_t>(down), 0);
  v.insert(v.end(), static_cast<std::size_t>(up), 1);
  return v;
}
}  // namespace

TEST_CASE("sampling") {
  const ProbabilityModel q = qubit_model();
  const OutcomeSample point = sample(q, 0.0, 500, 9);
  for (int e : point.outcomes) CHECK(e == 1);

  const OutcomeSample a = sample(q, 0.9, 1000, 77, 3), b = sample(q, 0.9, 1000, 77, 3);
  CHECK(a.outcomes == b.outcomes);
  CHECK(sample(q, 0.9, 1000, 77, 4).outcomes != a.outcomes);

  const SpinSpace s(4);
  const ProbabilityModel m(coherent_spin(s, 1.1, 0.3), SpinAxis::y(), povm_number_counting(s));
  const int shots = 100000;
  const std::vector<double> p = m.probabilities(0.7);
  const std::vector<int> counts = outcome_counts(sample(m, 0.7, shots, 2024).outcomes, m.outcome_count());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double sigma = std::sqrt(shots * p[k] * (1 - p[k]));
    CHECK(std::abs(counts[k] - shots * p[k]) <= 4 * sigma + 1e-9);
  }
  CHECK_THROWS_AS(outcome_counts({0, 5}, 2), DomainError);
  CHECK(sample(q, 0.1, 0, 1).outcomes.empty());
  CHECK_THROWS_AS(sample(q, 0.1, -1, 1), DomainError);
}

TEST_CASE("log-likelihood") {
  const ProbabilityModel q = qubit_model();
  CHECK(log_likelihood(q, {1}, kPi / 2) == doctest::Approx(std::log(0.5)));
  for (double phi : {0.1, 1.0, 2.0}) CHECK(std::abs(log_likelihood(q, {1}, phi) - 2 * std::log(std::cos(phi / 2))) < 1e-12);
  const std::vector<int> a = sample(q, 0.8, 37, 1).outcomes, b = sample(q, 0.8, 53, 2).outcomes;
  std::vector<int> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const double la = log_likelihood(q, a, 1.3), lb = log_likelihood(q, b, 1.3);
  CHECK(std::abs(log_likelihood(q, ab, 1.3) - (la + lb)) <= 1e-12 * std::abs(la + lb));
  // floor at the zero of P(down)
  CHECK(log_likelihood(q, {0}, 0.0) == doctest::Approx(std::log(kLikelihoodFloor)));
}

TEST_CASE("MLE") {
  const ProbabilityModel q = qubit_model();
  const Domain d{0.0, kPi};
  // counts match cos^2(theta0/2) exactly: 3 up, 1 down at theta0 = pi/3
  const MleResult exact = mle(q, repeat(3, 1), d);
  CHECK(std::abs(exact.estimate - kPi / 3) < 1e-6);
  CHECK_FALSE(exact.on_boundary);

  const MleResult far = mle(q, sample(q, 0.8, 10000, 5).outcomes, d);
  CHECK(std::abs(far.estimate - 0.8) < 0.05);

  const MleResult edge = mle(q, repeat(10, 0), d);
  CHECK(edge.on_boundary);
  CHECK(edge.estimate < 1e-6);

  const SpinSpace s2(2);
  const ProbabilityModel m2(fock(s2, HalfInt::integer(1)), SpinAxis::y(), povm_number_counting(s2));
  const Domain d2{0.05, 3.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::vector<int> o = sample(m2, 1.2, 60, seed).outcomes;
    const double oracle_max = oracle::grid_argmax([&](double x) { return log_likelihood(m2, o, x); }, d2.lo, d2.hi, 1000000);
    CHECK(std::abs(mle(m2, o, d2).estimate - oracle_max) < 1e-5);
  }
  CHECK_THROWS_AS(mle(q, {1}, Domain{1.0, 1.0}), DomainError);
}

TEST_CASE("MLE Monte Carlo is deterministic and thread-count independent") {
  const ProbabilityModel q = qubit_model();
  const Domain d{0.0, kPi};
  MonteCarloOptions a{200, 11, 1}, b{200, 11, 4};
  const EstimationReport ra = mle_monte_carlo(q, 0.8, 100, d, a);
  const EstimationReport rb = mle_monte_carlo(q, 0.8, 100, d, b);
  CHECK(ra.estimates == rb.estimates);
  CHECK(ra.trials == 200);
  CHECK(ra.estimates.size() == 200);
  CHECK(ra.variance >= 0.0);
  CHECK(ra.crlb == doctest::Approx(1.0 / 100));
  std::ostringstream x, y;
  write_estimates_csv(x, ra);
  write_estimates_csv(y, rb);
  CHECK(x.str() == y.str());
  CHECK(x.str().rfind("trial,estimate\n0,", 0) == 0);
}

TEST_CASE("MLE variance scales as 1/m") {
  const ProbabilityModel q = qubit_model();
  const Domain d{0.0, kPi};
  const EstimationReport r1 = mle_monte_carlo(q, 1.0, 200, d, {2000, 3, 0});
  const EstimationReport r2 = mle_monte_carlo(q, 1.0, 400, d, {2000, 4, 0});
  // ratio of two chi-square variances with 1999 dof: ~4.5% relative spread
  CHECK(r1.variance / r2.variance == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("posterior basics") {
  const ProbabilityModel q = qubit_model();
  const Domain d{0.0, kPi};
  const PosteriorDistribution flat = bayes_posterior(q, {}, d);
  CHECK(flat.grid.size() == static_cast<std::size_t>(kPosteriorGridPoints));
  CHECK(flat.grid.front() == 0.0);
  CHECK(flat.grid.back() == kPi);
  for (double v : flat.density) CHECK(std::abs(v - 1.0 / kPi) < 1e-12);

  Prior tilted{"linear", [](double x) { return x; }};
  const PosteriorDistribution prior_only = bayes_posterior(q, {}, d, tilted, 501);
  for (std::size_t i = 0; i < prior_only.grid.size(); ++i)
    CHECK(std::abs(prior_only.density[i] - prior_only.grid[i] * 2 / (kPi * kPi)) < 1e-9);
  CHECK(prior_only.prior_tag == "linear");

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::vector<int> o = sample(q, 1.1, 200, seed).outcomes;
    const PosteriorDistribution post = bayes_posterior(q, o, d);
    CHECK(std::abs(post.integral() - 1.0) < 1e-8);
    const PosteriorSummary s = posterior_summaries(post);
    const double cell = kPi / (kPosteriorGridPoints - 1);
    CHECK(std::abs(s.map - mle(q, o, d).estimate) <= cell);
    const BayesBound bb = bayes_variance_bound(post);
    CHECK_FALSE(bb.border_flag);
    CHECK(s.variance >= bb.bound * (1 - 1e-3));
  }
}

TEST_CASE("posterior summaries on a Gaussian") {
  const double mu = 1.5, sigma = 0.1;
  const PosteriorDistribution g = gaussian_posterior(mu, sigma, 0.5, 2.5, 2048);
  const PosteriorSummary s = posterior_summaries(g, 0.6827);
  CHECK(std::abs(s.mean - mu) < 1e-9);
  CHECK(std::abs(s.map - mu) < 1e-3);
  CHECK(std::abs(s.variance / (sigma * sigma) - 1.0) < 0.01);
  CHECK(std::abs(s.credible_half_width - sigma) < 1e-3 * sigma);
  const BayesBound b = bayes_variance_bound(g);
  CHECK(std::abs(b.g * sigma * sigma - 1.0) < 1e-3);
  CHECK_FALSE(b.border_flag);
  // symmetric mass routine against the erf oracle
  CHECK(std::abs(g.mass(mu - 2 * sigma, mu + 2 * sigma) - std::erf(2 / std::sqrt(2.0))) < 1e-5);

  const PosteriorDistribution cut = gaussian_posterior(mu, sigma, 1.45, 2.5, 2048);
  CHECK(bayes_variance_bound(cut).border_flag);

  // flat top with steep, vanishing edges
  PosteriorDistribution broad = gaussian_posterior(1.0, 1.0, 0.0, 2.0, 2048);
  for (std::size_t i = 0; i < broad.grid.size(); ++i) broad.density[i] = std::exp(-std::pow((broad.grid[i] - 1.0) / 0.5, 8));
  const double norm = broad.integral();
  for (double& v : broad.density) v /= norm;
  CHECK_FALSE(bayes_variance_bound(broad).border_flag);
  CHECK(bayes_variance_bound(broad).bound < 0.5 * posterior_summaries(broad).variance);
}

TEST_CASE("Bayes Monte Carlo reports") {
  const ProbabilityModel q = qubit_model();
  const BayesMonteCarloReport r = bayes_monte_carlo(q, 0.8, 300, Domain{0.0, kPi}, {100, 5, 0});
  CHECK(r.report.estimates.size() == 100);
  CHECK(r.mean_posterior_variance > 0.0);
  CHECK(std::abs(r.averaged_bound - 1.0 / r.mean_g) < 1e-15);
  CHECK(r.mean_posterior_variance >= r.averaged_bound * (1 - 1e-3));
  const BayesMonteCarloReport again = bayes_monte_carlo(q, 0.8, 300, Domain{0.0, kPi}, {100, 5, 3});
  CHECK(again.report.estimates == r.report.estimates);
}

TEST_CASE("method of moments") {
  const SpinSpace s(20);
  const ProbabilityModel m(coherent_spin(s, kPi / 2, 0.0), SpinAxis::y(), povm_number_counting(s));
  const std::vector<double> c = observable_values(m, op_jz(s));
  for (int i = 0; i < s.dim(); ++i) CHECK(c[i] == doctest::Approx(s.mu_at(i).value()));
  const Domain d{-1.2, 1.2};
  // <J_z> = -(N/2) sin(theta) and (Delta J_z)^2 = (N/4) cos^2(theta)
  for (double t : {-0.5, 0.0, 0.4, 1.0})
    CHECK(std::abs(moments_prediction(m, c, t, 10000) * 10000.0 * 20 - 1.0) < 1e-9);

  // outcomes whose sample mean equals f(theta0) exactly: N=2 with fock(+1) under y
  const SpinSpace s2(2);
  const ProbabilityModel m2(fock(s2, HalfInt::integer(1)), SpinAxis::y(), povm_number_counting(s2));
  const std::vector<double> c2 = observable_values(m2, op_jz(s2));
  // f(theta) = cos(theta); mean 0.5 from {+1, 0} gives theta0 = pi/3
  const MomentsResult r = method_of_moments(m2, c2, {2, 1}, Domain{0.0, kPi});
  CHECK(std::abs(r.estimate - kPi / 3) < 1e-10);
  CHECK(r.sample_mean == doctest::Approx(0.5));
  CHECK(std::abs(method_of_moments(m2, op_jz(s2), {2, 1}, Domain{0.0, kPi}).estimate - kPi / 3) < 1e-10);

  CHECK_THROWS_AS(method_of_moments(m2, c2, {2, 1}, Domain{-1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(method_of_moments(m2, c2, {2, 2}, Domain{0.5, 1.0}), OutOfRangeError);
  CHECK_THROWS_AS(observable_values(m2, op_jx(s2)), DomainError);
}

TEST_CASE("moments Monte Carlo") {
  const SpinSpace s(4);
  const ProbabilityModel m(coherent_spin(s, kPi / 2, 0.0), SpinAxis::y(), povm_number_counting(s));
  const std::vector<double> c = observable_values(m, op_jz(s));
  const MomentsMonteCarloReport r = moments_monte_carlo(m, c, 0.2, 2, Domain{-0.3, 0.3}, {200, 8, 0});
  CHECK(r.report.flagged > 0);
  for (double e : r.report.estimates) CHECK((e >= -0.3 && e <= 0.3));
  CHECK(r.predicted_variance == doctest::Approx(moments_prediction(m, c, 0.2, 2)));
}

TEST_CASE("Kullback-Leibler divergence") {
  const ProbabilityModel q = qubit_model();
  CHECK(kl_divergence(q, 0.7, 0.7) == 0.0);
  CHECK(std::isinf(kl_divergence(q, 0.7, 0.0)));
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const SpinSpace s(5);
  const ProbabilityModel m(coherent_spin(s, 1.0, 0.5), SpinAxis::x(), povm_number_counting(s));
  for (int i = 0; i < 100; ++i) CHECK(kl_divergence(m, u(rng), u(rng)) >= 0.0);
  for (double t : {0.3, 0.9, 1.7}) {
    const double delta = 1e-3;
    const double expected = fisher_information(m, t).fi * delta * delta / 2;
    CHECK(std::abs(kl_divergence(m, t, t + delta) / expected - 1.0) < 0.05);
  }
}

TEST_CASE("posterior CSV") {
  PosteriorDistribution p;
  p.grid = {0.0, 0.5};
  p.density = {1.0, 0.1};
  std::ostringstream os;
  write_posterior_csv(os, p);
  CHECK(os.str() == "grid_phi,posterior_density\n0,1\n0.5,0.10000000000000001\n");
}
