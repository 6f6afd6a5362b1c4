#include "phasekit/serialize.hpp"

#include <numbers>

#include "phasekit/errors.hpp"

namespace phasekit {

namespace {

double number_or(const Json& params, const char* key, double fallback) {
  if (!params.is_object() || !params.contains(key)) return fallback;
  const Json& v = params.at(key);
  if (!v.is_number()) throw DomainError(std::string("probe parameter '") + key + "' must be a number");
  return v.get<double>();
}

Vector3 vector_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw DomainError("axis must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw DomainError("complex numbers are encoded as [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

State build_probe(int n_particles, const std::string& kind, const Json& parameters) {
  const SpinSpace space(n_particles);
  if (kind == "fock") {
    return fock(space, HalfInt::from_double(number_or(parameters, "mu", space.j().value())));
  }
  if (kind == "css") {
    return coherent_spin(space, number_or(parameters, "polar", 0.5 * std::numbers::pi),
                         number_or(parameters, "azimuth", 0.0));
  }
  if (kind == "noon") return noon(space);
  if (kind == "twin-fock") return twin_fock(space);
  if (kind == "ghz") {
    const Vector3 axis = parameters.is_object() && parameters.contains("axis")
                             ? vector_from_json(parameters.at("axis"))
                             : Vector3::UnitZ();
    return ghz_along(space, SpinAxis::normalized(axis));
  }
  if (kind == "mix") {
    if (!parameters.is_object() || !parameters.contains("components") ||
        !parameters.at("components").is_array()) {
      throw DomainError("mix probe needs a 'components' array");
    }
    std::vector<std::pair<double, State>> parts;
    for (const Json& c : parameters.at("components")) {
      const std::string sub = c.value("kind", "");
      if (sub == "mix") throw DomainError("nested mix probes are not supported");
      parts.emplace_back(c.value("weight", 0.0),
                         build_probe(n_particles, sub, c.value("parameters", Json::object())));
    }
    return mix(parts);
  }
  throw DomainError("unknown probe kind '" + kind + "'");
}

Json state_to_json(const State& state, const std::string& kind, const Json& parameters) {
  Json j;
  j["n_particles"] = space_of(state).n_particles();
  j["kind"] = kind;
  j["parameters"] = parameters;
  if (const auto* pure = std::get_if<PureState>(&state)) {
    Json amps = Json::array();
    for (Eigen::Index i = 0; i < pure->amplitudes().size(); ++i) {
      amps.push_back(complex_to_json(pure->amplitudes()(i)));
    }
    j["amplitudes"] = amps;
  } else {
    const ComplexMatrix& rho = std::get<MixedState>(state).rho();
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < rho.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < rho.cols(); ++c) row.push_back(complex_to_json(rho(r, c)));
      rows.push_back(row);
    }
    j["rho"] = rows;
  }
  return j;
}

State state_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n_particles") || !j.at("n_particles").is_number_integer()) {
    throw DomainError("state JSON needs an integer 'n_particles'");
  }
  const SpinSpace space(j.at("n_particles").get<int>());
  if (j.contains("amplitudes")) {
    const Json& a = j.at("amplitudes");
    if (!a.is_array() || static_cast<int>(a.size()) != space.dim()) {
      throw DomainError("'amplitudes' must hold N+1 complex numbers");
    }
    ComplexVector v(space.dim());
    for (int i = 0; i < space.dim(); ++i) v(i) = complex_from_json(a[i]);
    return PureState(space, v);
  }
  if (j.contains("rho")) {
    const Json& r = j.at("rho");
    if (!r.is_array() || static_cast<int>(r.size()) != space.dim()) {
      throw DomainError("'rho' must be an (N+1)x(N+1) array");
    }
    ComplexMatrix rho(space.dim(), space.dim());
    for (int a = 0; a < space.dim(); ++a) {
      if (!r[a].is_array() || static_cast<int>(r[a].size()) != space.dim()) {
        throw DomainError("'rho' must be an (N+1)x(N+1) array");
      }
      for (int b = 0; b < space.dim(); ++b) rho(a, b) = complex_from_json(r[a][b]);
    }
    return MixedState(space, rho);
  }
  return build_probe(space.n_particles(), j.value("kind", ""),
                     j.value("parameters", Json::object()));
}

}  // namespace phasekit
