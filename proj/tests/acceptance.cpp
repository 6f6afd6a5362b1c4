// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "phasekit/estimators.hpp"
#include "phasekit/metrology.hpp"
#include "phasekit/witness.hpp"

using namespace phasekit;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) detail = what;
    ok = ok && condition;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ProbabilityModel qubit_model() {
  const SpinSpace s(1);
  return ProbabilityModel(fock(s, HalfInt::from_twice(1)), SpinAxis::y(), povm_number_counting(s));
}

Verdict noon_saturation() {
  Verdict v;
  const SpinSpace s(10);
  const PureState nn = noon(s);
  const double fq = qfi_pure(nn, SpinAxis::z());
  v.require(std::abs(fq - 100.0) < 1e-9, "qfi_pure = " + fmt(fq));
  const double f = fisher_information(ProbabilityModel(nn, SpinAxis::z(), povm_probe_projection(nn)), 1e-3).fi;
  v.require(std::abs(f - 100.0) < 1e-4, "F = " + fmt(f));
  v.detail = v.ok ? "F_Q = " + fmt(fq) + ", F(1e-3) = " + fmt(f) : v.detail;
  return v;
}

Verdict coherent_shot_noise() {
  Verdict v;
  const SpinSpace s(10);
  const ProbabilityModel m(fock(s, s.j()), SpinAxis::y(), povm_number_counting(s));
  double worst = 0.0;
  for (double t : {0.1, 0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(fisher_information(m, t).fi - 10.0));
  v.require(worst < 1e-8, "max |F - 10| = " + fmt(worst));
  if (v.ok) v.detail = "max |F - N| = " + fmt(worst);
  return v;
}

Verdict twin_fock_value() {
  Verdict v;
  const SpinSpace s(10);
  const PureState tf = twin_fock(s);
  const double fq = qfi_pure(tf, SpinAxis::y());
  v.require(std::abs(fq - 60.0) < 1e-8, "qfi_pure = " + fmt(fq));
  const ProbabilityModel m(tf, SpinAxis::y(), povm_number_counting(s));
  double worst = 0.0;
  for (double t : {0.3, 0.7}) worst = std::max(worst, std::abs(fisher_information(m, t).fi - 60.0));
  v.require(worst < 1e-6, "max |F - 60| = " + fmt(worst));
  if (v.ok) v.detail = "F_Q = " + fmt(fq) + ", max |F - 60| = " + fmt(worst);
  return v;
}

Verdict ghz_oscillation() {
  Verdict v;
  const SpinSpace s(8);
  const PureState nn = noon(s);
  const PureState css = coherent_spin(s, kPi / 2, 0.0);
  const ProbabilityModel ghz(nn, SpinAxis::z(), povm_probe_projection(nn));
  const ProbabilityModel sep(css, SpinAxis::z(), povm_probe_projection(css));
  double worst_ghz = 0.0, worst_sep = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = 2 * kPi * i / 99;
    const double c = std::cos(4 * t);
    worst_ghz = std::max(worst_ghz, std::abs(ghz.probabilities(t)[0] - c * c));
    worst_sep = std::max(worst_sep, std::abs(sep.probabilities(t)[0] - std::pow(std::cos(t / 2), 16)));
  }
  v.require(worst_ghz < 1e-10, "GHZ deviation " + fmt(worst_ghz));
  v.require(worst_sep < 1e-10, "separable deviation " + fmt(worst_sep));
  if (v.ok) v.detail = "max deviations " + fmt(worst_ghz) + ", " + fmt(worst_sep);
  return v;
}

Verdict mle_efficiency() {
  Verdict v;
  const ProbabilityModel q = qubit_model();
  const EstimationReport r = mle_monte_carlo(q, 0.8, 400, Domain{0.0, kPi}, {2000, 20240601, 0});
  const double crlb = 1.0 / 400.0;
  const double ratio = r.variance / crlb;
  const double bias = std::abs(r.mean - 0.8);
  v.require(std::abs(ratio - 1.0) <= 0.10, "variance / CRLB = " + fmt(ratio));
  v.require(bias < 3 * r.standard_error, "bias " + fmt(bias) + " vs 3 stderr " + fmt(3 * r.standard_error));
  v.require(std::abs(r.crlb - crlb) < 1e-12, "reported CRLB " + fmt(r.crlb));
  if (v.ok) v.detail = "variance / CRLB = " + fmt(ratio) + ", |bias| / stderr = " + fmt(bias / r.standard_error);
  return v;
}

Verdict bayes_normality() {
  Verdict v;
  const ProbabilityModel q = qubit_model();
  const Domain d{0.0, kPi};
  const int m = 1000;
  const double target = 1.0 / m;
  const PosteriorDistribution post = bayes_posterior(q, sample(q, 0.8, m, 99).outcomes, d);
  const double pv = posterior_summaries(post).variance;
  const BayesBound bb = bayes_variance_bound(post);
  v.require(std::abs(pv / target - 1.0) <= 0.15, "posterior variance * mF = " + fmt(pv / target));
  v.require(std::abs(bb.bound / pv - 1.0) <= 0.15, "bound / posterior variance = " + fmt(bb.bound / pv));
  v.require(!bb.border_flag, "posterior reaches the domain edge");

  const BayesMonteCarloReport mc = bayes_monte_carlo(q, 0.8, m, d, {200, 7, 0});
  v.require(std::abs(mc.mean_posterior_variance / target - 1.0) <= 0.15,
            "average posterior variance * mF = " + fmt(mc.mean_posterior_variance / target));
  v.require(std::abs(mc.averaged_bound / mc.mean_posterior_variance - 1.0) <= 0.15,
            "averaged bound / posterior variance = " + fmt(mc.averaged_bound / mc.mean_posterior_variance));
  if (v.ok)
    v.detail = "posterior variance * mF = " + fmt(pv / target) + ", bound / variance = " + fmt(bb.bound / pv) +
               ", averaged over 200 runs " + fmt(mc.mean_posterior_variance / target);
  return v;
}

Verdict moments_consistency() {
  Verdict v;
  const SpinSpace s(20);
  const ProbabilityModel model(coherent_spin(s, kPi / 2, 0.0), SpinAxis::y(), povm_number_counting(s));
  const std::vector<double> c = observable_values(model, op_jz(s));
  const int m = 10000;
  const double expected = 1.0 / (m * 20.0);
  const Domain d{-1.2, 1.2};
  double worst = 0.0;
  for (int i = 0; i < 25; ++i) {
    const double t = d.lo + 0.05 + (d.width() - 0.1) * i / 24;
    worst = std::max(worst, std::abs(moments_prediction(model, c, t, m) - expected));
  }
  v.require(worst < 1e-9, "prediction deviation " + fmt(worst));
  const MomentsMonteCarloReport mc = moments_monte_carlo(model, c, 0.3, m, d, {1000, 4242, 0});
  const double ratio = mc.report.variance / mc.predicted_variance;
  v.require(std::abs(ratio - 1.0) <= 0.15, "spread / prediction = " + fmt(ratio));
  v.require(mc.report.flagged == 0, "out-of-range trials");
  if (v.ok) v.detail = "spread / prediction = " + fmt(ratio) + ", max |prediction - 1/(mN)| = " + fmt(worst);
  return v;
}

Verdict bound_chain() {
  Verdict v;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  double worst_chain = 0.0, worst_eq = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const SpinSpace s(1 + trial % 10);
    const PureState p = PureState::canonical(s, oracle::random_vector(s.dim(), rng));
    const SpinAxis axis(oracle::random_unit(rng));
    const oracle::CMatrix u = oracle::random_unitary(s.dim(), rng);
    std::vector<ComplexMatrix> e;
    for (int k = 0; k < s.dim(); ++k) e.push_back(u.col(k) * u.col(k).adjoint());
    const ProbabilityModel model(p, axis, Povm(e));
    const double fq = qfi_pure(p, axis);
    const oracle::CMatrix h = op_j(s, axis);
    const Complex mean = p.amplitudes().dot(h * p.amplitudes());
    const double four_var = 4.0 * ((h * p.amplitudes()).squaredNorm() - std::norm(mean));
    worst_eq = std::max(worst_eq, std::abs(fq - four_var));
    const double f = fisher_information(model, angle(rng)).fi;
    worst_chain = std::max(worst_chain, f - fq);
  }
  v.require(worst_chain <= 1e-9, "F exceeds F_Q by " + fmt(worst_chain));
  v.require(worst_eq <= 1e-9, "F_Q differs from 4 Var by " + fmt(worst_eq));

  double worst_convex = -INFINITY;
  std::uniform_real_distribution<double> w(0.05, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    const SpinSpace s(1 + trial % 8);
    const SpinAxis axis(oracle::random_unit(rng));
    const MixedState a(s, oracle::random_density(s.dim(), 1 + trial % s.dim(), rng));
    const MixedState b(s, oracle::random_density(s.dim(), 1 + (trial / 3) % s.dim(), rng));
    const double g = w(rng);
    const MixedState mixed = mix({{g, State(a)}, {1 - g, State(b)}});
    worst_convex = std::max(worst_convex, qfi_mixed(mixed, axis) - (g * qfi_mixed(a, axis) + (1 - g) * qfi_mixed(b, axis)));
  }
  v.require(worst_convex <= 1e-9, "convexity violated by " + fmt(worst_convex));

  double worst_add = 0.0;
  std::uniform_real_distribution<double> radius(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector3d r1 = oracle::random_unit(rng) * radius(rng), r2 = oracle::random_unit(rng) * radius(rng);
    const Eigen::Vector3d n = oracle::random_unit(rng);
    const oracle::CMatrix rho = oracle::kron(oracle::qubit_density(r1), oracle::qubit_density(r2));
    const oracle::CMatrix id = oracle::CMatrix::Identity(2, 2);
    const oracle::CMatrix h = oracle::kron(oracle::half_pauli(n), id) + oracle::kron(id, oracle::half_pauli(n));
    const double joint = qfi_unitary(eig_hermitian(rho), h);
    const double parts = qfi_mixed(MixedState(SpinSpace(1), oracle::qubit_density(r1)), SpinAxis(n)) +
                         qfi_mixed(MixedState(SpinSpace(1), oracle::qubit_density(r2)), SpinAxis(n));
    worst_add = std::max(worst_add, std::abs(joint - parts));
  }
  v.require(worst_add <= 1e-9, "additivity defect " + fmt(worst_add));
  if (v.ok)
    v.detail = "max(F - F_Q) = " + fmt(worst_chain) + ", max convexity excess = " + fmt(worst_convex) +
               ", additivity defect = " + fmt(worst_add);
  return v;
}

Verdict separable_ceiling() {
  Verdict v;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_ceiling = -INFINITY, min_prime = INFINITY;
  int defined = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 20;
    const State css = coherent_spin(SpinSpace(n), std::acos(1 - 2 * u(rng)), 2 * kPi * u(rng));
    const auto frame = oracle::random_frame(rng);
    const SqueezingAxes axes = SqueezingAxes::make(SpinAxis(frame[0]), SpinAxis(frame[1]), SpinAxis(frame[2]));
    const double fq = qfi(css, SpinAxis(oracle::random_unit(rng)));
    worst_ceiling = std::max(worst_ceiling, fq - n);
    if (const auto check = squeezing_fisher_check(css, axes)) {
      ++defined;
      v.require(check->holds, "N/F_Q = " + fmt(check->lhs) + " > xi_R^2 = " + fmt(check->rhs));
    }
    const SqueezingReport sq = squeezing(css, axes);
    if (sq.xi_r_prime_squared) min_prime = std::min(min_prime, *sq.xi_r_prime_squared);
  }
  v.require(worst_ceiling <= 1e-9, "F_Q exceeds N by " + fmt(worst_ceiling));
  v.require(min_prime >= 1.0 - 1e-9, "min xi_R'^2 = " + fmt(min_prime));
  if (v.ok)
    v.detail = "max(F_Q - N) = " + fmt(worst_ceiling) + ", min xi_R'^2 = " + fmt(min_prime) + ", " +
               std::to_string(defined) + " squeezing checks";
  return v;
}

Verdict depth_staircase() {
  Verdict v;
  v.require(k_bound(100, 1) == 100.0, "k=1");
  v.require(k_bound(100, 25) == 2500.0, "k=25");
  v.require(k_bound(100, 99) == 9802.0, "k=99");
  v.require(k_bound(100, 100) == 10000.0, "k=100");
  const DepthReport r = entanglement_depth(100.0, 100);
  for (std::size_t i = 1; i < r.steps.size(); ++i)
    v.require(r.steps[i].bound >= r.steps[i - 1].bound, "staircase decreases at k=" + std::to_string(i + 1));
  std::ostringstream csv;
  write_staircase_csv(csv, r);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  v.require(line == "k,s,r,bound", "header " + line);
  std::vector<double> bounds;
  while (std::getline(in, line)) bounds.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  v.require(bounds.size() == 100, "row count");
  if (bounds.size() == 100) {
    v.require(bounds[0] == 100.0 && bounds[24] == 2500.0 && bounds[98] == 9802.0 && bounds[99] == 10000.0,
              "CSV values");
  }
  if (v.ok) v.detail = "bounds 100, 2500, 9802, 10000; CSV matches";
  return v;
}

Verdict wigner_kernel() {
  Verdict v;
  double worst_norm = 0.0, worst_comp = 0.0, worst_expm = 0.0, worst_mz = 0.0;
  for (int n = 1; n <= 20; ++n) {
    const SpinSpace s(n);
    const ComplexMatrix jy = op_jy(s);
    for (int i = 0; i < 50; ++i) {
      const double t = -kPi + 2 * kPi * i / 49;
      const Eigen::MatrixXd d = wigner_d_matrix(s, t);
      worst_norm = std::max(worst_norm, (d.rowwise().squaredNorm().array() - 1.0).abs().maxCoeff());
      const double t2 = 0.37 + 0.11 * i;
      worst_comp = std::max(worst_comp, (wigner_d_matrix(s, t + t2) - d * wigner_d_matrix(s, t2)).cwiseAbs().maxCoeff());
      const ComplexMatrix ry = expm_generator(jy, t);
      worst_expm = std::max(worst_expm, max_abs(ry - d.cast<Complex>()));
      worst_mz = std::max(worst_mz, max_abs(mach_zehnder(s, t) - ry));
    }
  }
  v.require(worst_norm < 1e-10, "row normalization " + fmt(worst_norm));
  v.require(worst_comp < 1e-9, "composition " + fmt(worst_comp));
  v.require(worst_expm < 1e-9, "expm agreement " + fmt(worst_expm));
  v.require(worst_mz < 1e-10, "Mach-Zehnder identity " + fmt(worst_mz));
  if (v.ok)
    v.detail = "norm " + fmt(worst_norm) + ", composition " + fmt(worst_comp) + ", expm " + fmt(worst_expm) +
               ", MZ " + fmt(worst_mz);
  return v;
}

Verdict sld_residual() {
  Verdict v;
  std::mt19937_64 rng(12);
  double worst_res = 0.0, worst_tr = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 7;
    const SpinSpace s(n);
    const int rank = std::min(s.dim(), 2 + trial % 3);
    const MixedState rho(s, oracle::random_density(s.dim(), rank, rng));
    const SpinAxis axis(oracle::random_unit(rng));
    const ComplexMatrix h = op_j(s, axis);
    const ComplexMatrix l = sld(rho, axis);
    const ComplexMatrix defect = rho.rho() * l + l * rho.rho() - Complex(0, 2) * (rho.rho() * h - h * rho.rho());
    Eigen::SelfAdjointEigenSolver<oracle::CMatrix> es(rho.rho());
    const oracle::CMatrix in_basis = es.eigenvectors().adjoint() * defect * es.eigenvectors();
    for (int a = 0; a < s.dim(); ++a)
      for (int b = 0; b < s.dim(); ++b)
        if (es.eigenvalues()(a) + es.eigenvalues()(b) > 1e-12) worst_res = std::max(worst_res, std::abs(in_basis(a, b)));
    worst_tr = std::max(worst_tr, std::abs((rho.rho() * l * l).trace().real() - qfi_mixed(rho, axis)));
  }
  v.require(worst_res < 1e-8, "residual " + fmt(worst_res));
  v.require(worst_tr < 1e-9, "Tr[rho L^2] - F_Q = " + fmt(worst_tr));
  if (v.ok) v.detail = "max residual " + fmt(worst_res) + ", max |Tr[rho L^2] - F_Q| = " + fmt(worst_tr);
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"NOON saturation", noon_saturation},
      {"coherent-state shot noise", coherent_shot_noise},
      {"twin-Fock value", twin_fock_value},
      {"GHZ oscillation", ghz_oscillation},
      {"MLE asymptotic efficiency", mle_efficiency},
      {"Bayesian normality", bayes_normality},
      {"method-of-moments consistency", moments_consistency},
      {"bound-chain property suite", bound_chain},
      {"separable ceiling and witness consistency", separable_ceiling},
      {"depth staircase", depth_staircase},
      {"Wigner-d kernel", wigner_kernel},
      {"SLD residual", sld_residual},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s (%.2f s)\n", v.ok ? "PASS" : "FAIL", index++, name, v.detail.c_str(), seconds);
    failures += v.ok ? 0 : 1;
  }
  std::printf("%d of %d criteria passed\n", 12 - failures, 12);
  return failures == 0 ? 0 : 1;
}
