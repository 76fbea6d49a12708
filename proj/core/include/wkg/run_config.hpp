#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wkg/bootstrap_monitor.hpp"
#include "wkg/evolver.hpp"
#include "wkg/frame_geometry.hpp"
#include "wkg/initial_data.hpp"
#include "wkg/radial_grid.hpp"

namespace wkg {

// Names accepted in the "checks" list.
const std::vector<std::string>& known_checks();

struct RunConfig {
  RadialGrid grid{26.0, 5201};
  double t_final = 25.0;
  double cfl = 0.4;
  int stride = 5;
  Mode mode = Mode::coupled;
  CoefficientSet coeffs;
  double epsilon = 0.01;
  Profile profile = Profile::bump;

  // Diagnostic slices s_min, s_min + ds, ... up to the last fully covered one.
  double s_min = 2.0;
  double s_max = 20.0;
  double ds = 0.5;

  BootstrapConfig bootstrap;
  int rays = 20;
  double ray_s0 = 2.0;
  // Anti-damped partner for the damping comparison; B negated when absent.
  std::optional<CoefficientSet> violated;

  std::vector<std::string> checks;
  std::filesystem::path output;
  std::uint64_t seed = 0;
  int threads = 1;

  // Largest slice fully inside the run: t(s) on the cone edge is (s² + 1)/2.
  double covered_s_max() const;
  std::vector<double> s_values() const;
  bool wants(const std::string& check) const;
  void validate() const;  // throws ConfigError
};

// Throws ConfigError on missing or ill-typed fields.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace wkg
