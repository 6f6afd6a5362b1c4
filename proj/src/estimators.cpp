#include "phasekit/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "phasekit/csv.hpp"
#include "phasekit/errors.hpp"
#include "phasekit/rng.hpp"

namespace phasekit {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5) - 1) / 2

// Runs body(i) for i in [0, n); every index is processed exactly once and
// results depend only on i.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body body) {
  unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  return cdf;
}

std::vector<int> draw(const std::vector<double>& p, const std::vector<double>& cdf, int m,
                      Philox4x32& rng) {
  int last = static_cast<int>(p.size()) - 1;
  while (last > 0 && p[last] <= 0.0) --last;
  std::vector<int> out(m);
  for (int i = 0; i < m; ++i) {
    const double u = rng.uniform() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    out[i] = std::min(static_cast<int>(it - cdf.begin()), last);
  }
  return out;
}

std::vector<double> linspace(const Domain& d, int points) {
  std::vector<double> g(points);
  const double step = d.width() / (points - 1);
  for (int i = 0; i < points; ++i) g[i] = d.lo + i * step;
  g.back() = d.hi;
  return g;
}

// ln max(P, floor) for every grid point and outcome.
std::vector<std::vector<double>> log_table(const ProbabilityModel& model,
                                           const std::vector<double>& grid, double p_floor) {
  std::vector<std::vector<double>> table(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> p = model.probabilities(grid[g]);
    for (double& v : p) v = std::log(std::max(v, p_floor));
    table[g] = std::move(p);
  }
  return table;
}

double dot_counts(const std::vector<double>& logp, const std::vector<int>& counts) {
  double s = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] != 0) s += counts[i] * logp[i];
  }
  return s;
}

void summarize(EstimationReport& r) {
  const std::size_t n = r.estimates.size();
  r.trials = n;
  if (n == 0) return;
  double sum = 0.0;
  for (double e : r.estimates) sum += e;
  r.mean = sum / n;
  double ss = 0.0;
  for (double e : r.estimates) ss += (e - r.mean) * (e - r.mean);
  r.variance = n > 1 ? ss / (n - 1) : 0.0;
  r.standard_error = std::sqrt(r.variance / n);
}

double crlb_at(const ProbabilityModel& model, double theta, int m) {
  const double f = fisher_information(model, theta).fi;
  return f > 0.0 ? 1.0 / (m * f) : std::numeric_limits<double>::infinity();
}

void check_mc(int m, const MonteCarloOptions& mc) {
  if (m < 1) throw DomainError("Monte-Carlo run requires m >= 1");
  if (mc.trials < 1) throw DomainError("Monte-Carlo run requires trials >= 1");
}

MleResult mle_from_grid(const ProbabilityModel& model, const std::vector<int>& counts,
                        const Domain& domain, const MleOptions& options,
                        const std::vector<double>& grid,
                        const std::vector<std::vector<double>>& table) {
  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double ll = dot_counts(table[g], counts);
    if (ll > best_ll) {
      best_ll = ll;
      best = g;
    }
  }
  const auto ll_at = [&](double phi) {
    return log_likelihood_counts(model.probabilities(phi), counts, options.p_floor);
  };
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = ll_at(x1);
  double f2 = ll_at(x2);
  while (b - a > options.refine_tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = ll_at(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = ll_at(x2);
    }
  }
  MleResult result;
  result.estimate = 0.5 * (a + b);
  result.log_likelihood = ll_at(result.estimate);
  if (best_ll > result.log_likelihood) {
    result.estimate = grid[best];
    result.log_likelihood = best_ll;
  }
  result.on_boundary = result.estimate - domain.lo <= options.refine_tol ||
                       domain.hi - result.estimate <= options.refine_tol;
  return result;
}

PosteriorDistribution posterior_from_table(const std::vector<double>& grid,
                                           const std::vector<std::vector<double>>& table,
                                           const std::vector<int>& counts,
                                           const std::vector<double>& log_prior,
                                           const std::string& tag) {
  const std::size_t n = grid.size();
  std::vector<double> logpost(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < n; ++g) {
    logpost[g] = dot_counts(table[g], counts) + log_prior[g];
    top = std::max(top, logpost[g]);
  }
  if (!std::isfinite(top)) {
    throw NumericalError("bayes_posterior: posterior vanishes on the whole grid");
  }
  PosteriorDistribution post;
  post.grid = grid;
  post.prior_tag = tag;
  post.density.resize(n);
  for (std::size_t g = 0; g < n; ++g) post.density[g] = std::exp(logpost[g] - top);
  const double z = post.integral();
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw NumericalError("bayes_posterior: posterior cannot be normalized");
  }
  for (double& d : post.density) d /= z;
  return post;
}

std::vector<double> log_prior_on(const Prior& prior, const std::vector<double>& grid) {
  std::vector<double> out(grid.size(), 0.0);
  if (!prior.density) return out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double v = prior.density(grid[g]);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("bayes_posterior: prior must be finite and non-negative");
    }
    out[g] = v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  }
  return out;
}

void check_grid_points(int points, int minimum, const char* what) {
  if (points < minimum) {
    std::ostringstream msg;
    msg << what << ": at least " << minimum << " grid points required";
    throw DomainError(msg.str());
  }
}

}  // namespace

void validate(const Domain& domain) {
  if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi) || !(domain.lo < domain.hi)) {
    throw DomainError("domain must be a finite interval with lo < hi");
  }
}

OutcomeSample sample(const ProbabilityModel& model, double theta_true, int m, std::uint64_t seed,
                     std::uint64_t stream) {
  if (m < 0) throw DomainError("sample: m must be non-negative");
  const std::vector<double> p = model.probabilities(theta_true);
  Philox4x32 rng(seed, stream);
  OutcomeSample s;
  s.theta_true = theta_true;
  s.seed = seed;
  s.stream = stream;
  s.outcome_count = p.size();
  s.outcomes = draw(p, cumulative(p), m, rng);
  return s;
}

std::vector<int> outcome_counts(const std::vector<int>& outcomes, std::size_t outcome_count) {
  std::vector<int> counts(outcome_count, 0);
  for (int o : outcomes) {
    if (o < 0 || static_cast<std::size_t>(o) >= outcome_count) {
      throw DomainError("outcome id outside the POVM");
    }
    ++counts[o];
  }
  return counts;
}

double log_likelihood_counts(const std::vector<double>& probabilities,
                             const std::vector<int>& counts, double p_floor) {
  if (probabilities.size() != counts.size()) {
    throw DomainError("log_likelihood: histogram size does not match the outcome table");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] != 0) s += counts[i] * std::log(std::max(probabilities[i], p_floor));
  }
  return s;
}

double log_likelihood(const ProbabilityModel& model, const std::vector<int>& outcomes, double phi,
                      double p_floor) {
  return log_likelihood_counts(model.probabilities(phi),
                               outcome_counts(outcomes, model.outcome_count()), p_floor);
}

MleResult mle(const ProbabilityModel& model, const std::vector<int>& outcomes, const Domain& domain,
              const MleOptions& options) {
  validate(domain);
  check_grid_points(options.grid_points, 3, "mle");
  const std::vector<double> grid = linspace(domain, options.grid_points);
  return mle_from_grid(model, outcome_counts(outcomes, model.outcome_count()), domain, options,
                       grid, log_table(model, grid, options.p_floor));
}

EstimationReport mle_monte_carlo(const ProbabilityModel& model, double theta_true, int m,
                                 const Domain& domain, const MonteCarloOptions& mc,
                                 const MleOptions& options) {
  validate(domain);
  check_mc(m, mc);
  check_grid_points(options.grid_points, 3, "mle");
  const std::vector<double> grid = linspace(domain, options.grid_points);
  const auto table = log_table(model, grid, options.p_floor);
  const std::vector<double> p = model.probabilities(theta_true);
  const std::vector<double> cdf = cumulative(p);

  EstimationReport report;
  report.estimator = "mle";
  report.theta_true = theta_true;
  report.m = m;
  report.seed = mc.seed;
  report.estimates.assign(mc.trials, 0.0);
  std::vector<char> flags(mc.trials, 0);
  parallel_for(mc.trials, mc.threads, [&](std::size_t t) {
    Philox4x32 rng(mc.seed, t);
    const std::vector<int> counts = outcome_counts(draw(p, cdf, m, rng), p.size());
    const MleResult r = mle_from_grid(model, counts, domain, options, grid, table);
    report.estimates[t] = r.estimate;
    flags[t] = r.on_boundary ? 1 : 0;
  });
  report.flagged = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), 1));
  summarize(report);
  report.crlb = crlb_at(model, theta_true, m);
  return report;
}

double PosteriorDistribution::integral() const {
  double s = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    s += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return s;
}

namespace {

std::vector<double> prefix_integral(const PosteriorDistribution& post) {
  std::vector<double> prefix(post.grid.size(), 0.0);
  for (std::size_t i = 1; i < post.grid.size(); ++i) {
    prefix[i] = prefix[i - 1] +
                0.5 * (post.density[i] + post.density[i - 1]) * (post.grid[i] - post.grid[i - 1]);
  }
  return prefix;
}

// Integral of the linear interpolant from grid.front() to x.
double integral_upto(const PosteriorDistribution& post, const std::vector<double>& prefix,
                     double x) {
  const auto& grid = post.grid;
  if (x <= grid.front()) return 0.0;
  if (x >= grid.back()) return prefix.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - grid.begin());
  const double h = grid[k] - grid[k - 1];
  const double t = x - grid[k - 1];
  const double f0 = post.density[k - 1];
  const double f1 = post.density[k];
  return prefix[k - 1] + f0 * t + (f1 - f0) * t * t / (2.0 * h);
}

double mass_between(const PosteriorDistribution& post, const std::vector<double>& prefix,
                    double a, double b) {
  if (!(a < b)) return 0.0;
  return integral_upto(post, prefix, b) - integral_upto(post, prefix, a);
}

}  // namespace

double PosteriorDistribution::mass(double a, double b) const {
  if (grid.size() < 2) return 0.0;
  return mass_between(*this, prefix_integral(*this), a, b);
}

PosteriorDistribution bayes_posterior(const ProbabilityModel& model,
                                      const std::vector<int>& outcomes, const Domain& domain,
                                      const Prior& prior, int grid_points) {
  validate(domain);
  check_grid_points(grid_points, 3, "bayes_posterior");
  const std::vector<double> grid = linspace(domain, grid_points);
  const std::vector<int> counts = outcome_counts(outcomes, model.outcome_count());
  std::vector<std::vector<double>> table;
  if (outcomes.empty()) {
    table.assign(grid.size(), std::vector<double>(model.outcome_count(), 0.0));
  } else {
    table = log_table(model, grid, kLikelihoodFloor);
  }
  return posterior_from_table(grid, table, counts, log_prior_on(prior, grid), prior.tag);
}

double credible_half_width(const PosteriorDistribution& post, double centre, double mass) {
  if (!(mass > 0.0 && mass <= 1.0)) {
    throw DomainError("credible_half_width: mass must lie in (0, 1]");
  }
  if (post.grid.size() < 2) {
    throw DomainError("credible_half_width: malformed posterior");
  }
  const std::vector<double> prefix = prefix_integral(post);
  const double target = mass * prefix.back();
  double lo = 0.0;
  double hi = std::max(centre - post.grid.front(), post.grid.back() - centre);
  if (mass_between(post, prefix, centre - hi, centre + hi) < target) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass_between(post, prefix, centre - mid, centre + mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PosteriorSummary posterior_summaries(const PosteriorDistribution& post, double mass,
                                     PointEstimate centre) {
  if (post.grid.size() < 2 || post.grid.size() != post.density.size()) {
    throw DomainError("posterior_summaries: malformed posterior");
  }
  const auto moment = [&](auto fn) {
    double s = 0.0;
    for (std::size_t i = 1; i < post.grid.size(); ++i) {
      s += 0.5 * (fn(i) + fn(i - 1)) * (post.grid[i] - post.grid[i - 1]);
    }
    return s;
  };
  PosteriorSummary s;
  const double z = post.integral();
  s.mean = moment([&](std::size_t i) { return post.grid[i] * post.density[i]; }) / z;
  s.variance = moment([&](std::size_t i) {
                 const double d = post.grid[i] - s.mean;
                 return d * d * post.density[i];
               }) /
               z;
  const auto top = std::max_element(post.density.begin(), post.density.end());
  s.map = post.grid[static_cast<std::size_t>(top - post.density.begin())];
  s.credible_mass = mass;
  s.credible_half_width =
      credible_half_width(post, centre == PointEstimate::Mean ? s.mean : s.map, mass);
  return s;
}

BayesBound bayes_variance_bound(const PosteriorDistribution& post) {
  const std::size_t n = post.grid.size();
  if (n < 3 || post.density.size() != n) {
    throw DomainError("bayes_variance_bound: malformed posterior");
  }
  const double peak = *std::max_element(post.density.begin(), post.density.end());
  BayesBound out;
  out.border_flag = post.density.front() > 1e-8 * peak || post.density.back() > 1e-8 * peak;
  std::vector<double> integrand(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = post.density[i];
    if (p < 1e-14 * peak) continue;
    double dp;
    if (i == 0) {
      dp = (post.density[1] - post.density[0]) / (post.grid[1] - post.grid[0]);
    } else if (i == n - 1) {
      dp = (post.density[n - 1] - post.density[n - 2]) / (post.grid[n - 1] - post.grid[n - 2]);
    } else {
      dp = (post.density[i + 1] - post.density[i - 1]) / (post.grid[i + 1] - post.grid[i - 1]);
    }
    integrand[i] = dp * dp / p;
  }
  for (std::size_t i = 1; i < n; ++i) {
    out.g += 0.5 * (integrand[i] + integrand[i - 1]) * (post.grid[i] - post.grid[i - 1]);
  }
  out.bound = out.g > 0.0 ? 1.0 / out.g : std::numeric_limits<double>::infinity();
  return out;
}

BayesMonteCarloReport bayes_monte_carlo(const ProbabilityModel& model, double theta_true, int m,
                                        const Domain& domain, const MonteCarloOptions& mc,
                                        const Prior& prior, int grid_points) {
  validate(domain);
  check_mc(m, mc);
  check_grid_points(grid_points, 3, "bayes_posterior");
  const std::vector<double> grid = linspace(domain, grid_points);
  const auto table = log_table(model, grid, kLikelihoodFloor);
  const std::vector<double> log_prior = log_prior_on(prior, grid);
  const std::vector<double> p = model.probabilities(theta_true);
  const std::vector<double> cdf = cumulative(p);

  BayesMonteCarloReport out;
  EstimationReport& report = out.report;
  report.estimator = "bayes";
  report.theta_true = theta_true;
  report.m = m;
  report.seed = mc.seed;
  report.estimates.assign(mc.trials, 0.0);
  std::vector<double> variances(mc.trials, 0.0);
  std::vector<double> gs(mc.trials, 0.0);
  std::vector<char> flags(mc.trials, 0);
  parallel_for(mc.trials, mc.threads, [&](std::size_t t) {
    Philox4x32 rng(mc.seed, t);
    const std::vector<int> counts = outcome_counts(draw(p, cdf, m, rng), p.size());
    const PosteriorDistribution post = posterior_from_table(grid, table, counts, log_prior, prior.tag);
    const PosteriorSummary s = posterior_summaries(post);
    const BayesBound b = bayes_variance_bound(post);
    report.estimates[t] = s.mean;
    variances[t] = s.variance;
    gs[t] = b.g;
    flags[t] = b.border_flag ? 1 : 0;
  });
  summarize(report);
  report.crlb = crlb_at(model, theta_true, m);
  const double n = static_cast<double>(mc.trials);
  out.mean_posterior_variance = std::accumulate(variances.begin(), variances.end(), 0.0) / n;
  out.mean_g = std::accumulate(gs.begin(), gs.end(), 0.0) / n;
  out.averaged_bound = out.mean_g > 0.0 ? 1.0 / out.mean_g : std::numeric_limits<double>::infinity();
  out.border_flagged = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), 1));
  report.flagged = out.border_flagged;
  return out;
}

std::vector<double> observable_values(const ProbabilityModel& model,
                                      const ComplexMatrix& observable) {
  const Povm& povm = model.povm();
  if (observable.rows() != povm.dim() || observable.cols() != povm.dim()) {
    throw DomainError("observable dimension does not match the POVM");
  }
  std::vector<double> values(povm.size());
  ComplexMatrix rebuilt = ComplexMatrix::Zero(povm.dim(), povm.dim());
  for (std::size_t i = 0; i < povm.size(); ++i) {
    const ComplexMatrix& e = povm.element(i);
    const double weight = e.trace().real();
    values[i] = weight > 0.0 ? (e * observable).trace().real() / weight : 0.0;
    rebuilt += values[i] * e;
  }
  if (max_abs(rebuilt - observable) > 1e-10) {
    throw DomainError("observable is not a function of the measurement outcomes");
  }
  return values;
}

double moment_mean(const ProbabilityModel& model, const std::vector<double>& values, double phi) {
  const std::vector<double> p = model.probabilities(phi);
  if (p.size() != values.size()) {
    throw DomainError("one observable value per outcome required");
  }
  double f = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) f += values[i] * p[i];
  return f;
}

double moments_prediction(const ProbabilityModel& model, const std::vector<double>& values,
                          double phi, int m) {
  const std::vector<double> p = model.probabilities(phi);
  const std::vector<double> dp = model.derivative(phi);
  if (p.size() != values.size()) {
    throw DomainError("one observable value per outcome required");
  }
  double f = 0.0, f2 = 0.0, df = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    f += values[i] * p[i];
    f2 += values[i] * values[i] * p[i];
    df += values[i] * dp[i];
  }
  const double var = std::max(0.0, f2 - f * f);
  if (df == 0.0) return std::numeric_limits<double>::infinity();
  return var / (m * df * df);
}

namespace {

struct MonotoneMap {
  std::vector<double> grid;
  std::vector<double> f;
  bool increasing;
};

MonotoneMap check_monotone(const ProbabilityModel& model, const std::vector<double>& values,
                           const Domain& domain, int points) {
  check_grid_points(points, 2, "method_of_moments");
  MonotoneMap map;
  map.grid = linspace(domain, points);
  for (double phi : map.grid) map.f.push_back(moment_mean(model, values, phi));
  map.increasing = map.f.back() > map.f.front();
  for (std::size_t i = 1; i < map.f.size(); ++i) {
    const double step = map.f[i] - map.f[i - 1];
    if (map.increasing ? !(step > 0.0) : !(step < 0.0)) {
      std::ostringstream msg;
      msg << "method_of_moments: <M> is not strictly monotone on [" << domain.lo << ", "
          << domain.hi << "] (near phi = " << map.grid[i] << ")";
      throw DomainError(msg.str());
    }
  }
  return map;
}

double invert(const ProbabilityModel& model, const std::vector<double>& values,
              const MonotoneMap& map, double target, double tol) {
  // Bracket on the check grid, then bisect on the model.
  std::size_t k = 1;
  while (k + 1 < map.grid.size() &&
         (map.increasing ? map.f[k] < target : map.f[k] > target)) {
    ++k;
  }
  double a = map.grid[k - 1];
  double b = map.grid[k];
  double fa = map.f[k - 1] - target;
  if (fa == 0.0) return a;
  if (map.f[k] - target == 0.0) return b;
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    const double fm = moment_mean(model, values, mid) - target;
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

double sample_mean(const std::vector<double>& values, const std::vector<int>& counts, int m) {
  double s = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) s += values[i] * counts[i];
  return s / m;
}

void check_range(const MonotoneMap& map, double target) {
  const double lo = std::min(map.f.front(), map.f.back());
  const double hi = std::max(map.f.front(), map.f.back());
  if (target < lo || target > hi) {
    std::ostringstream msg;
    msg << "method_of_moments: sample mean " << target << " outside the range [" << lo << ", "
        << hi << "] of <M> on the domain";
    throw OutOfRangeError(msg.str());
  }
}

}  // namespace

MomentsResult method_of_moments(const ProbabilityModel& model, const std::vector<double>& values,
                                const std::vector<int>& outcomes, const Domain& domain,
                                const MomentsOptions& options) {
  validate(domain);
  if (outcomes.empty()) throw DomainError("method_of_moments: no outcomes");
  if (values.size() != model.outcome_count()) {
    throw DomainError("method_of_moments: one observable value per outcome required");
  }
  const MonotoneMap map = check_monotone(model, values, domain, options.check_points);
  const int m = static_cast<int>(outcomes.size());
  MomentsResult r;
  r.sample_mean = sample_mean(values, outcome_counts(outcomes, values.size()), m);
  check_range(map, r.sample_mean);
  r.estimate = invert(model, values, map, r.sample_mean, options.tolerance);
  r.variance_prediction = moments_prediction(model, values, r.estimate, m);
  return r;
}

MomentsResult method_of_moments(const ProbabilityModel& model, const ComplexMatrix& observable,
                                const std::vector<int>& outcomes, const Domain& domain,
                                const MomentsOptions& options) {
  return method_of_moments(model, observable_values(model, observable), outcomes, domain, options);
}

MomentsMonteCarloReport moments_monte_carlo(const ProbabilityModel& model,
                                            const std::vector<double>& values, double theta_true,
                                            int m, const Domain& domain,
                                            const MonteCarloOptions& mc,
                                            const MomentsOptions& options) {
  validate(domain);
  check_mc(m, mc);
  if (values.size() != model.outcome_count()) {
    throw DomainError("method_of_moments: one observable value per outcome required");
  }
  const MonotoneMap map = check_monotone(model, values, domain, options.check_points);
  const std::vector<double> p = model.probabilities(theta_true);
  const std::vector<double> cdf = cumulative(p);

  MomentsMonteCarloReport out;
  EstimationReport& report = out.report;
  report.estimator = "moments";
  report.theta_true = theta_true;
  report.m = m;
  report.seed = mc.seed;
  report.estimates.assign(mc.trials, 0.0);
  std::vector<char> flags(mc.trials, 0);
  const double f_lo = map.f.front();
  const double f_hi = map.f.back();
  parallel_for(mc.trials, mc.threads, [&](std::size_t t) {
    Philox4x32 rng(mc.seed, t);
    const double target = sample_mean(values, outcome_counts(draw(p, cdf, m, rng), p.size()), m);
    const double lo = std::min(f_lo, f_hi);
    const double hi = std::max(f_lo, f_hi);
    if (target < lo || target > hi) {
      // Nearer edge in f: the edge whose value the mean overshoots.
      const bool below = target < lo;
      const bool lo_edge = below == map.increasing;
      report.estimates[t] = lo_edge ? domain.lo : domain.hi;
      flags[t] = 1;
      return;
    }
    report.estimates[t] = invert(model, values, map, target, options.tolerance);
  });
  report.flagged = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), 1));
  summarize(report);
  report.crlb = crlb_at(model, theta_true, m);
  out.predicted_variance = moments_prediction(model, values, theta_true, m);
  return out;
}

double kl_divergence(const ProbabilityModel& model, double theta, double phi, double p_floor) {
  const std::vector<double> p = model.probabilities(theta);
  const std::vector<double> q = model.probabilities(phi);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= p_floor) continue;
    if (q[i] <= p_floor) return std::numeric_limits<double>::infinity();
    s += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, s);
}

void write_estimates_csv(std::ostream& out, const EstimationReport& report) {
  out << "trial,estimate\n";
  for (std::size_t i = 0; i < report.estimates.size(); ++i) {
    out << i << ',' << format_number(report.estimates[i]) << '\n';
  }
}

void write_posterior_csv(std::ostream& out, const PosteriorDistribution& post) {
  out << "grid_phi,posterior_density\n";
  for (std::size_t i = 0; i < post.grid.size(); ++i) {
    out << format_number(post.grid[i]) << ',' << format_number(post.density[i]) << '\n';
  }
}

}  // namespace phasekit
