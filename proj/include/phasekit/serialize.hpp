#pragma once

#include <string>

#include <json.hpp>

#include "phasekit/probes.hpp"

namespace phasekit {

using Json = nlohmann::json;

/// [re, im].
Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);

/// Named probe factory. Kinds and parameters:
///   fock {mu}, css {polar, azimuth}, noon {}, twin-fock {}, ghz {axis: [x,y,z]},
///   mix {components: [{weight, kind, parameters}, ...]}.
/// Angles in radians. Throws DomainError on unknown kinds or bad parameters.
State build_probe(int n_particles, const std::string& kind, const Json& parameters);

/// {n_particles, kind, parameters, amplitudes} for pure states or
/// {n_particles, kind, parameters, rho} for density matrices.
Json state_to_json(const State& state, const std::string& kind = "custom",
                   const Json& parameters = Json::object());

/// Accepts explicit amplitudes or rho; otherwise rebuilds from kind and parameters.
State state_from_json(const Json& j);

}  // namespace phasekit
