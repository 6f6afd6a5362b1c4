#include "phasekit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "phasekit/csv.hpp"
#include "phasekit/errors.hpp"
#include "phasekit/metrology.hpp"
#include "phasekit/witness.hpp"

namespace phasekit::cli {

namespace {

const std::vector<std::string> kCommands = {"bounds", "fisher-scan", "qfi",   "mle",
                                            "bayes",  "moments",     "depth", "squeeze"};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw DomainError(what + ": '" + text + "' is not a finite number");
  }
}

int parse_int(const std::string& text, const std::string& what) {
  const double v = parse_double(text, what);
  if (v != std::floor(v) || std::abs(v) > 2e9) {
    throw DomainError(what + ": '" + text + "' is not an integer");
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw DomainError(what + ": '" + text + "' is not an unsigned 64-bit integer");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw DomainError(what + ": '" + text + "' is out of range");
  }
}

ThetaGrid parse_theta_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw DomainError("--theta-grid expects START:STOP:POINTS");
  return {parse_double(parts[0], "--theta-grid start"), parse_double(parts[1], "--theta-grid stop"),
          parse_int(parts[2], "--theta-grid points")};
}

Domain parse_domain(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw DomainError("--domain expects LO:HI");
  return {parse_double(parts[0], "--domain lo"), parse_double(parts[1], "--domain hi")};
}

Json probe_token(const std::string& token) {
  const auto eq = token.find('=');
  const std::string kind = token.substr(0, eq);
  const std::string arg = eq == std::string::npos ? "" : token.substr(eq + 1);
  Json params = Json::object();
  if (kind == "fock") {
    if (!arg.empty()) params["mu"] = parse_double(arg, "fock mu");
  } else if (kind == "css") {
    if (!arg.empty()) {
      const auto angles = split(arg, '/');
      if (angles.size() != 2) throw DomainError("css expects css=POLAR/AZIMUTH");
      params["polar"] = parse_double(angles[0], "css polar");
      params["azimuth"] = parse_double(angles[1], "css azimuth");
    }
  } else if (kind == "ghz") {
    if (!arg.empty()) {
      const Vector3 a = parse_axis(arg);
      params["axis"] = Json::array({a.x(), a.y(), a.z()});
    }
  } else if (kind == "noon" || kind == "twin-fock") {
    if (!arg.empty()) throw DomainError(kind + " takes no parameters");
  } else {
    throw DomainError("unknown probe '" + kind + "'");
  }
  return Json{{"kind", kind}, {"parameters", params}};
}

template <class T>
T get_checked(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw DomainError(std::string("config key '") + key + "' has the wrong type");
  }
}

struct Output {
  Json results = Json::object();
  std::string csv;
  std::string failure;
};

ProbabilityModel make_model(const RunConfig& c, const State& probe) {
  const SpinAxis axis = SpinAxis::normalized(c.axis);
  if (c.povm == "counting") return ProbabilityModel(probe, axis, povm_number_counting(space_of(probe)));
  const auto* pure = std::get_if<PureState>(&probe);
  if (pure == nullptr) throw DomainError("the projection POVM needs a pure probe");
  return ProbabilityModel(probe, axis, povm_probe_projection(*pure));
}

Json vector_json(const Vector3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string csv_optional(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

Domain required_domain(const RunConfig& c) {
  if (!c.domain) {
    throw DomainError(c.command +
                      " needs an explicit --domain LO:HI: the likelihood is usually even in theta "
                      "and a branch must be chosen");
  }
  return *c.domain;
}

Json report_json(const EstimationReport& r) {
  return Json{{"estimator", r.estimator},
              {"theta_true", r.theta_true},
              {"m", r.m},
              {"trials", r.trials},
              {"seed", r.seed},
              {"mean", r.mean},
              {"bias", r.mean - r.theta_true},
              {"variance", r.variance},
              {"standard_error", r.standard_error},
              {"crlb", r.crlb},
              {"flagged", r.flagged},
              {"estimates", r.estimates}};
}

std::string majority_failure(std::size_t flagged, std::size_t trials, const std::string& what) {
  if (2 * flagged <= trials) return "";
  std::ostringstream msg;
  msg << what << " in " << flagged << " of " << trials << " trials";
  return msg.str();
}

Output cmd_bounds(const RunConfig& c, const State& probe) {
  const double fq = qfi(probe, SpinAxis::normalized(c.axis));
  const double sn = bound_shot_noise(c.n, c.m);
  const double hl = bound_heisenberg(c.n, c.m);
  const double qcr = quantum_cramer_rao(fq, c.m);
  Output o;
  o.results = {{"n", c.n}, {"m", c.m}, {"shot_noise", sn}, {"heisenberg", hl},
               {"qfi", fq}, {"quantum_cramer_rao", qcr}};
  o.csv = "n,m,shot_noise,heisenberg,qfi,quantum_cramer_rao\n" + std::to_string(c.n) + ',' +
          std::to_string(c.m) + ',' + format_number(sn) + ',' + format_number(hl) + ',' +
          format_number(fq) + ',' + format_number(qcr) + '\n';
  return o;
}

Output cmd_fisher_scan(const RunConfig& c, const State& probe) {
  const ProbabilityModel model = make_model(c, probe);
  const std::vector<double> thetas =
      c.theta_grid ? c.theta_grid->values() : std::vector<double>{c.theta};
  const double fq = qfi(probe, model.axis());
  Output o;
  Json rows = Json::array();
  std::string csv = "theta,fisher,qfi,four_variance,limit_point\n";
  for (double theta : thetas) {
    const FisherReport f = fisher_information(model, theta);
    const ComplexMatrix rho = model.evolved(theta);
    const ComplexMatrix& h = model.generator();
    const double mean = (rho * h).trace().real();
    const double var4 = 4.0 * std::max(0.0, (rho * h * h).trace().real() - mean * mean);
    rows.push_back({{"theta", theta}, {"fisher", f.fi}, {"qfi", fq}, {"four_variance", var4},
                    {"limit_point", f.limit_point}});
    csv += format_number(theta) + ',' + format_number(f.fi) + ',' + format_number(fq) + ',' +
           format_number(var4) + ',' + (f.limit_point ? "1" : "0") + '\n';
  }
  o.results = {{"derivative_method", "analytic-commutator"}, {"rows", rows}};
  o.csv = csv;
  return o;
}

Output cmd_qfi(const RunConfig& c, const State& probe) {
  const SpinAxis axis = SpinAxis::normalized(c.axis);
  const double fq = qfi(probe, axis);
  const double var4 = 4.0 * variance(probe, op_j(space_of(probe), axis));
  const OptimalAxis best = optimal_axis(probe);
  const bool useful = useful_entanglement(fq, c.n);
  Output o;
  o.results = {{"qfi", fq},
               {"four_variance", var4},
               {"optimal_axis", vector_json(best.axis.vector())},
               {"qfi_max", best.qfi_max},
               {"useful_entanglement", useful}};
  const Vector3& n = best.axis.vector();
  o.csv = "qfi,four_variance,qfi_max,axis_x,axis_y,axis_z,useful_entanglement\n" +
          format_number(fq) + ',' + format_number(var4) + ',' + format_number(best.qfi_max) + ',' +
          format_number(n.x()) + ',' + format_number(n.y()) + ',' + format_number(n.z()) + ',' +
          (useful ? "1" : "0") + '\n';
  return o;
}

MonteCarloOptions mc_options(const RunConfig& c) { return {c.trials, c.seed, c.threads}; }

Output cmd_mle(const RunConfig& c, const State& probe) {
  const ProbabilityModel model = make_model(c, probe);
  const Domain domain = required_domain(c);
  const EstimationReport r = mle_monte_carlo(model, c.theta, c.m, domain, mc_options(c));
  Output o;
  o.results = report_json(r);
  std::ostringstream csv;
  write_estimates_csv(csv, r);
  o.csv = csv.str();
  o.failure = majority_failure(r.flagged, r.trials, "maximum on the domain boundary");
  return o;
}

Json summary_json(const PosteriorSummary& s) {
  return {{"mean", s.mean},
          {"map", s.map},
          {"variance", s.variance},
          {"credible_mass", s.credible_mass},
          {"credible_half_width", s.credible_half_width}};
}

Output cmd_bayes(const RunConfig& c, const State& probe) {
  const ProbabilityModel model = make_model(c, probe);
  const Domain domain = required_domain(c);
  Output o;
  // The posterior of the first trial's record is exported as the trace.
  const OutcomeSample first = sample(model, c.theta, c.m, c.seed, 0);
  const PosteriorDistribution post = bayes_posterior(model, first.outcomes, domain, {}, c.grid_points);
  const PosteriorSummary summary = posterior_summaries(post, c.mass);
  const BayesBound bound = bayes_variance_bound(post);
  o.results = {{"prior", post.prior_tag},
               {"posterior", summary_json(summary)},
               {"variance_bound", bound.bound},
               {"g", bound.g},
               {"border_flag", bound.border_flag},
               {"grid_phi", post.grid},
               {"posterior_density", post.density}};
  if (c.m > 0) {
    const BayesMonteCarloReport mc =
        bayes_monte_carlo(model, c.theta, c.m, domain, mc_options(c), {}, c.grid_points);
    o.results["monte_carlo"] = report_json(mc.report);
    o.results["monte_carlo"]["mean_posterior_variance"] = mc.mean_posterior_variance;
    o.results["monte_carlo"]["mean_g"] = mc.mean_g;
    o.results["monte_carlo"]["averaged_bound"] = mc.averaged_bound;
    o.failure = majority_failure(mc.border_flagged, mc.report.trials,
                                 "posterior support reaching the domain edge");
  }
  std::ostringstream csv;
  write_posterior_csv(csv, post);
  o.csv = csv.str();
  return o;
}

Output cmd_moments(const RunConfig& c, const State& probe) {
  const ProbabilityModel model = make_model(c, probe);
  const Domain domain = required_domain(c);
  ComplexMatrix observable = op_jz(space_of(probe));
  if (c.observable == "jz2") observable = observable * observable;
  const std::vector<double> values = observable_values(model, observable);
  const MomentsMonteCarloReport mc =
      moments_monte_carlo(model, values, c.theta, c.m, domain, mc_options(c));
  Output o;
  o.results = report_json(mc.report);
  o.results["observable"] = c.observable;
  o.results["predicted_variance"] = mc.predicted_variance;
  std::vector<double> predictions;
  std::string csv = "trial,estimate,predicted_variance\n";
  for (std::size_t t = 0; t < mc.report.estimates.size(); ++t) {
    const double est = mc.report.estimates[t];
    const double pred = moments_prediction(model, values, est, c.m);
    predictions.push_back(pred);
    csv += std::to_string(t) + ',' + format_number(est) + ',' + format_number(pred) + '\n';
  }
  o.results["predicted_variances"] = predictions;
  o.csv = csv;
  o.failure = majority_failure(mc.report.flagged, mc.report.trials,
                               "sample mean outside the range of <M>");
  return o;
}

Output cmd_depth(const RunConfig& c, const State& probe) {
  double value;
  FisherKind kind = c.fisher_kind == "classical" ? FisherKind::Classical : FisherKind::Quantum;
  if (c.fisher) {
    value = *c.fisher;
  } else if (kind == FisherKind::Quantum) {
    value = qfi(probe, SpinAxis::normalized(c.axis));
  } else {
    value = fisher_information(make_model(c, probe), c.theta).fi;
  }
  const DepthReport r = entanglement_depth(value, c.n, 1.0, kind);
  Output o;
  Json steps = Json::array();
  for (const DepthStep& s : r.steps) {
    steps.push_back({{"k", s.k}, {"s", s.s}, {"r", s.r}, {"bound", s.bound}});
  }
  o.results = {{"n", r.n_particles}, {"fisher_value", r.fisher_value},
               {"fisher_kind", to_string(r.kind)}, {"depth", r.depth},
               {"useful_entanglement", r.useful}, {"steps", steps}};
  std::ostringstream csv;
  write_staircase_csv(csv, r);
  o.csv = csv.str();
  return o;
}

Output cmd_squeeze(const RunConfig&, const State& probe) {
  const SqueezingAxes axes = squeezing_axes_from_mean_spin(probe);
  const SqueezingReport sq = squeezing(probe, axes);
  const auto check = squeezing_fisher_check(probe, axes);
  Output o;
  o.results = {{"xi_r_squared", optional_json(sq.xi_r_squared)},
               {"xi_r_prime_squared", optional_json(sq.xi_r_prime_squared)},
               {"variance_n1", sq.variance_n1},
               {"mean_spin", vector_json(sq.mean_spin)},
               {"axes",
                {{"n1", vector_json(axes.n1.vector())},
                 {"n2", vector_json(axes.n2.vector())},
                 {"n3", vector_json(axes.n3.vector())}}}};
  if (check) {
    o.results["fisher_check"] = {{"lhs", check->lhs}, {"rhs", check->rhs}, {"holds", check->holds}};
  } else {
    o.results["fisher_check"] = nullptr;
  }
  o.csv = "xi_r_squared,xi_r_prime_squared,lhs,rhs,holds\n" + csv_optional(sq.xi_r_squared) + ',' +
          csv_optional(sq.xi_r_prime_squared) + ',' +
          (check ? format_number(check->lhs) + ',' + format_number(check->rhs) + ',' +
                       (check->holds ? "1" : "0")
                 : std::string(",,")) +
          '\n';
  return o;
}

Output execute(const RunConfig& c) {
  const State probe = build_probe(c.n, c.probe_kind, c.probe_parameters);
  if (c.command == "bounds") return cmd_bounds(c, probe);
  if (c.command == "fisher-scan") return cmd_fisher_scan(c, probe);
  if (c.command == "qfi") return cmd_qfi(c, probe);
  if (c.command == "mle") return cmd_mle(c, probe);
  if (c.command == "bayes") return cmd_bayes(c, probe);
  if (c.command == "moments") return cmd_moments(c, probe);
  if (c.command == "depth") return cmd_depth(c, probe);
  return cmd_squeeze(c, probe);
}

}  // namespace

std::vector<double> ThetaGrid::values() const {
  std::vector<double> v(points);
  if (points == 1) {
    v[0] = start;
    return v;
  }
  for (int i = 0; i < points; ++i) v[i] = start + (stop - start) * i / (points - 1);
  v.back() = stop;
  return v;
}

Vector3 parse_axis(const std::string& text) {
  if (text == "x") return Vector3::UnitX();
  if (text == "y") return Vector3::UnitY();
  if (text == "z") return Vector3::UnitZ();
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw DomainError("axis must be x, y, z or nx,ny,nz");
  const Vector3 v(parse_double(parts[0], "axis"), parse_double(parts[1], "axis"),
                  parse_double(parts[2], "axis"));
  return SpinAxis::normalized(v).vector();
}

std::pair<std::string, Json> parse_probe(const std::string& text) {
  if (text.find(':') == std::string::npos) {
    const Json p = probe_token(text);
    return {p.at("kind").get<std::string>(), p.at("parameters")};
  }
  Json components = Json::array();
  for (const std::string& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw DomainError("mix entries are WEIGHT:PROBE");
    Json c = probe_token(item.substr(colon + 1));
    c["weight"] = parse_double(item.substr(0, colon), "mix weight");
    components.push_back(c);
  }
  return {"mix", Json{{"components", components}}};
}

RunConfig config_from_json(const Json& j, RunConfig c) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  static const std::vector<std::string> known = {
      "schema", "command", "n", "probe", "axis", "povm", "theta", "theta_grid", "m", "trials",
      "seed", "domain", "out", "format", "fisher", "fisher_kind", "observable", "mass",
      "grid_points", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw DomainError("unknown config key '" + key + "'");
    }
  }
  if (j.contains("schema") && j.at("schema") != kConfigSchema) {
    throw DomainError(std::string("config schema must be ") + kConfigSchema);
  }
  if (j.contains("command")) c.command = get_checked<std::string>(j, "command");
  if (j.contains("n")) c.n = get_checked<int>(j, "n");
  if (j.contains("probe")) {
    const Json& p = j.at("probe");
    if (p.is_string()) {
      std::tie(c.probe_kind, c.probe_parameters) = parse_probe(p.get<std::string>());
    } else if (p.is_object() && p.contains("kind")) {
      c.probe_kind = get_checked<std::string>(p, "kind");
      c.probe_parameters = p.value("parameters", Json::object());
    } else {
      throw DomainError("config 'probe' must be a string or {kind, parameters}");
    }
  }
  if (j.contains("axis")) {
    const Json& a = j.at("axis");
    if (a.is_string()) {
      c.axis = parse_axis(a.get<std::string>());
    } else if (a.is_array() && a.size() == 3 && a[0].is_number() && a[1].is_number() &&
               a[2].is_number()) {
      c.axis = SpinAxis::normalized(Vector3(a[0].get<double>(), a[1].get<double>(),
                                            a[2].get<double>()))
                   .vector();
    } else {
      throw DomainError("config 'axis' must be x|y|z or a 3-element array");
    }
  }
  if (j.contains("povm")) c.povm = get_checked<std::string>(j, "povm");
  if (j.contains("theta")) c.theta = get_checked<double>(j, "theta");
  if (j.contains("theta_grid")) {
    const Json& g = j.at("theta_grid");
    if (g.is_null()) {
      c.theta_grid.reset();
    } else if (g.is_string()) {
      c.theta_grid = parse_theta_grid(g.get<std::string>());
    } else {
      c.theta_grid = ThetaGrid{get_checked<double>(g, "start"), get_checked<double>(g, "stop"),
                               get_checked<int>(g, "points")};
    }
  }
  if (j.contains("m")) c.m = get_checked<int>(j, "m");
  if (j.contains("trials")) {
    const long long t = get_checked<long long>(j, "trials");
    if (t < 1) throw DomainError("trials must be >= 1");
    c.trials = static_cast<std::size_t>(t);
  }
  if (j.contains("seed")) c.seed = get_checked<std::uint64_t>(j, "seed");
  if (j.contains("domain")) {
    const Json& d = j.at("domain");
    if (d.is_null()) {
      c.domain.reset();
    } else if (d.is_string()) {
      c.domain = parse_domain(d.get<std::string>());
    } else if (d.is_array() && d.size() == 2 && d[0].is_number() && d[1].is_number()) {
      c.domain = Domain{d[0].get<double>(), d[1].get<double>()};
    } else {
      throw DomainError("config 'domain' must be \"LO:HI\" or [lo, hi]");
    }
  }
  if (j.contains("out")) c.out = get_checked<std::string>(j, "out");
  if (j.contains("format")) c.format = get_checked<std::string>(j, "format");
  if (j.contains("fisher")) {
    if (j.at("fisher").is_null()) {
      c.fisher.reset();
    } else {
      c.fisher = get_checked<double>(j, "fisher");
    }
  }
  if (j.contains("fisher_kind")) c.fisher_kind = get_checked<std::string>(j, "fisher_kind");
  if (j.contains("observable")) c.observable = get_checked<std::string>(j, "observable");
  if (j.contains("mass")) c.mass = get_checked<double>(j, "mass");
  if (j.contains("grid_points")) c.grid_points = get_checked<int>(j, "grid_points");
  if (j.contains("threads")) c.threads = get_checked<unsigned>(j, "threads");
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["schema"] = kConfigSchema;
  j["command"] = c.command;
  j["n"] = c.n;
  j["probe"] = {{"kind", c.probe_kind}, {"parameters", c.probe_parameters}};
  j["axis"] = vector_json(c.axis);
  j["povm"] = c.povm;
  j["theta"] = c.theta;
  j["theta_grid"] = c.theta_grid ? Json{{"start", c.theta_grid->start},
                                        {"stop", c.theta_grid->stop},
                                        {"points", c.theta_grid->points}}
                                 : Json(nullptr);
  j["m"] = c.m;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["domain"] = c.domain ? Json::array({c.domain->lo, c.domain->hi}) : Json(nullptr);
  j["out"] = c.out;
  j["format"] = c.format;
  j["fisher"] = c.fisher ? Json(*c.fisher) : Json(nullptr);
  j["fisher_kind"] = c.fisher_kind;
  j["observable"] = c.observable;
  j["mass"] = c.mass;
  j["grid_points"] = c.grid_points;
  j["threads"] = c.threads;
  return j;
}

void validate(const RunConfig& c) {
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end()) {
    throw DomainError("unknown command '" + c.command + "'");
  }
  if (c.n < 1 || c.n > 400) throw DomainError("n must lie in [1, 400]");
  const int min_m = c.command == "bayes" ? 0 : 1;
  if (c.m < min_m || c.m > 100000000) {
    throw DomainError("m must lie in [" + std::to_string(min_m) + ", 1e8]");
  }
  if (c.trials < 1 || c.trials > 10000000) throw DomainError("trials must lie in [1, 1e7]");
  if (!std::isfinite(c.theta)) throw DomainError("theta must be finite");
  if (c.theta_grid) {
    if (c.theta_grid->points < 1 || c.theta_grid->points > 1000000) {
      throw DomainError("theta grid needs between 1 and 1e6 points");
    }
    if (!std::isfinite(c.theta_grid->start) || !std::isfinite(c.theta_grid->stop)) {
      throw DomainError("theta grid bounds must be finite");
    }
  }
  if (c.domain) phasekit::validate(*c.domain);
  if (c.povm != "counting" && c.povm != "projection") {
    throw DomainError("povm must be counting or projection");
  }
  if (c.format != "csv" && c.format != "json") throw DomainError("format must be csv or json");
  if (c.fisher_kind != "quantum" && c.fisher_kind != "classical") {
    throw DomainError("fisher kind must be quantum or classical");
  }
  if (c.fisher && !(*c.fisher >= 0.0)) throw DomainError("fisher value must be >= 0");
  if (c.observable != "jz" && c.observable != "jz2") {
    throw DomainError("observable must be jz or jz2");
  }
  if (!(c.mass > 0.0 && c.mass <= 1.0)) throw DomainError("credible mass must lie in (0, 1]");
  if (c.grid_points < 3 || c.grid_points > 1000000) {
    throw DomainError("grid points must lie in [3, 1e6]");
  }
  if (!c.axis.allFinite() || std::abs(c.axis.norm() - 1.0) > 1e-12) {
    throw DomainError("axis must be a unit vector");
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "phasekit: phase-estimation toolkit for two-mode interferometers.\n"
      "All angles are in radians."};
  app.set_help_flag("-h,--help", "Print this help and exit");
  std::string command, config_path, seed, out_path, format, n, m, trials, theta, theta_grid,
      domain, probe, axis, povm, fisher, fisher_kind, observable, mass, grid_points, threads;
  app.add_option("command", command,
                 "bounds | fisher-scan | qfi | mle | bayes | moments | depth | squeeze")
      ->required();
  app.add_option("--config", config_path, "JSON config file; flags override its keys");
  app.add_option("--seed", seed, "Unsigned 64-bit seed of the Monte-Carlo streams");
  app.add_option("--out", out_path, "Write the result here instead of stdout");
  app.add_option("--format", format, "csv | json");
  app.add_option("--n", n, "Number of particles N");
  app.add_option("--m", m, "Measurements per estimate");
  app.add_option("--trials", trials, "Monte-Carlo trials");
  app.add_option("--theta", theta, "True phase (radians)");
  app.add_option("--theta-grid", theta_grid, "START:STOP:POINTS (radians)");
  app.add_option("--domain", domain, "Estimation domain LO:HI (radians)");
  app.add_option("--probe", probe,
                 "fock[=MU] | css[=POLAR/AZ] | noon | twin-fock | ghz[=AXIS] | W:PROBE,W:PROBE,...");
  app.add_option("--axis", axis, "Rotation axis x | y | z | nx,ny,nz");
  app.add_option("--povm", povm, "counting | projection");
  app.add_option("--fisher", fisher, "depth: Fisher value to classify");
  app.add_option("--fisher-kind", fisher_kind, "depth: quantum | classical");
  app.add_option("--observable", observable, "moments: jz | jz2");
  app.add_option("--mass", mass, "bayes: credible mass");
  app.add_option("--grid-points", grid_points, "bayes: posterior grid size");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  RunConfig config;
  Output result;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw DomainError("cannot read config file '" + config_path + "'");
      Json j;
      try {
        j = Json::parse(in);
      } catch (const Json::exception& e) {
        throw DomainError("config file is not valid JSON: " + std::string(e.what()));
      }
      config = config_from_json(j, config);
    }
    config.command = command;
    if (!seed.empty()) config.seed = parse_u64(seed, "--seed");
    if (!out_path.empty()) config.out = out_path;
    if (!format.empty()) config.format = format;
    if (!n.empty()) config.n = parse_int(n, "--n");
    if (!m.empty()) config.m = parse_int(m, "--m");
    if (!trials.empty()) {
      const int t = parse_int(trials, "--trials");
      if (t < 1) throw DomainError("--trials must be >= 1");
      config.trials = static_cast<std::size_t>(t);
    }
    if (!theta.empty()) config.theta = parse_double(theta, "--theta");
    if (!theta_grid.empty()) config.theta_grid = parse_theta_grid(theta_grid);
    if (!domain.empty()) config.domain = parse_domain(domain);
    if (!probe.empty()) std::tie(config.probe_kind, config.probe_parameters) = parse_probe(probe);
    if (!axis.empty()) config.axis = parse_axis(axis);
    if (!povm.empty()) config.povm = povm;
    if (!fisher.empty()) config.fisher = parse_double(fisher, "--fisher");
    if (!fisher_kind.empty()) config.fisher_kind = fisher_kind;
    if (!observable.empty()) config.observable = observable;
    if (!mass.empty()) config.mass = parse_double(mass, "--mass");
    if (!grid_points.empty()) config.grid_points = parse_int(grid_points, "--grid-points");
    if (!threads.empty()) {
      const int t = parse_int(threads, "--threads");
      if (t < 0) throw DomainError("--threads must be >= 0");
      config.threads = static_cast<unsigned>(t);
    }
    validate(config);
    result = execute(config);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitStatistical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Json::exception& e) {
    err << "error: malformed JSON value: " << e.what() << '\n';
    return kExitConfig;
  }

  std::string text;
  if (config.format == "csv") {
    text = result.csv;
  } else {
    Json report;
    report["schema"] = kReportSchema;
    report["command"] = config.command;
    report["config"] = config_to_json(config);
    report["results"] = result.results;
    if (!result.failure.empty()) report["statistical_failure"] = result.failure;
    text = report.dump(2) + '\n';
  }
  if (config.out.empty()) {
    out << text;
  } else {
    std::ofstream file(config.out, std::ios::binary);
    file << text;
    if (!file) {
      err << "error: cannot write '" << config.out << "'\n";
      return kExitConfig;
    }
  }
  if (!result.failure.empty()) {
    err << "statistical failure: " << result.failure << '\n';
    return kExitStatistical;
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("phasekit");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(storage.size()), argv.data(), out, err);
}

}  // namespace phasekit::cli
