#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phasekit/estimators.hpp"
#include "phasekit/serialize.hpp"

namespace phasekit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitStatistical = 3;

inline constexpr const char* kConfigSchema = "phasekit.config/1";
inline constexpr const char* kReportSchema = "phasekit.report/1";

struct ThetaGrid {
  double start = 0.0;
  double stop = 0.0;
  int points = 1;

  std::vector<double> values() const;
};

/// Everything a command needs. Angles in radians.
struct RunConfig {
  std::string command;
  int n = 10;
  std::string probe_kind = "css";
  Json probe_parameters = Json::object();
  Vector3 axis = Vector3::UnitY();
  std::string povm = "counting";
  double theta = 0.5;
  std::optional<ThetaGrid> theta_grid;
  int m = 100;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::optional<Domain> domain;
  std::string out;
  std::string format = "json";
  /// depth: externally measured Fisher value; computed from the probe when empty.
  std::optional<double> fisher;
  /// depth: "quantum" (F_Q of the probe) or "classical" (F of the model at theta).
  std::string fisher_kind = "quantum";
  /// moments: jz or jz2.
  std::string observable = "jz";
  /// bayes: credible mass.
  double mass = 0.6827;
  int grid_points = kPosteriorGridPoints;
  unsigned threads = 0;
};

/// Overlays the keys present in j onto base. Unknown keys are rejected.
RunConfig config_from_json(const Json& j, RunConfig base = {});
Json config_to_json(const RunConfig& config);

/// Range checks; throws DomainError.
void validate(const RunConfig& config);

/// Parses "fock", "fock=MU", "css", "css=POLAR/AZ", "noon", "twin-fock",
/// "ghz", "ghz=AXIS" or a mix "W:TOKEN,W:TOKEN,..." into (kind, parameters).
std::pair<std::string, Json> parse_probe(const std::string& text);

/// "x", "y", "z" or "nx,ny,nz" (normalized).
Vector3 parse_axis(const std::string& text);

/// Entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phasekit::cli
