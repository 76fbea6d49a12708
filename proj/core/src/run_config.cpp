#include "wkg/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "wkg/errors.hpp"

namespace wkg {

using nlohmann::json;

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "frame",   "box_identity", "ode",         "conservation", "ks",
      "kg_decay", "probe",       "rays",        "decomposition", "bootstrap",
      "sharp_decay", "recursion", "damping",    "determinism"};
  return names;
}

double RunConfig::covered_s_max() const {
  const double reach = std::sqrt(std::max(2.0 * t_final - 1.0, 0.0));
  return std::min(s_max, reach);
}

std::vector<double> RunConfig::s_values() const {
  std::vector<double> out;
  const double hi = covered_s_max();
  for (int i = 0;; ++i) {
    const double s = s_min + i * ds;
    if (s > hi + 1e-9) break;
    out.push_back(s);
  }
  return out;
}

bool RunConfig::wants(const std::string& check) const {
  return std::find(checks.begin(), checks.end(), check) != checks.end();
}

void RunConfig::validate() const {
  if (grid.n < 16 || !(grid.r_max > 0.0)) throw ConfigError("grid: need n >= 16 and r_max > 0");
  if (!(t_final > kInitialTime)) throw ConfigError("time: t_final must exceed 2");
  if (!(cfl > 0.0 && cfl <= 0.8)) throw ConfigError("time: cfl must lie in (0, 0.8]");
  if (stride < 1) throw ConfigError("time: stride must be positive");
  // Compact data stay inside r < t − 1; the outer boundary must not be reached.
  if (grid.r_max < t_final + 1.0)
    throw ConfigError("grid: r_max must be at least t_final + 1 so the boundary stays quiet");
  coeffs.validate();
  if (violated) violated->validate();
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("data: epsilon must be >= 0");
  if (!(ds > 0.0) || !(s_min >= kInitialTime) || !(s_max >= s_min))
    throw ConfigError("slices: need ds > 0 and 2 <= s_min <= s_max");
  bootstrap.validate();
  if (rays < 1) throw ConfigError("rays: count must be positive");
  if (!(ray_s0 >= kInitialTime)) throw ConfigError("rays: s0 must be at least 2");
  if (threads < 1) throw ConfigError("threads must be positive");
  for (const std::string& c : checks)
    if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
      throw ConfigError("unknown check '" + c + "'");
}

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

CoefficientSet read_coeffs(const json& j, CoefficientSet k) {
  read(j, "A00", k.A00);
  read(j, "A0r", k.A0r);
  read(j, "Arr", k.Arr);
  read(j, "B", k.B);
  read(j, "c", k.c);
  read(j, "h00", k.h00);
  read(j, "p0", k.p0);
  read(j, "q", k.q);
  for (const auto& [key, _] : j.items()) {
    static const char* allowed[] = {"A00", "A0r", "Arr", "B", "c", "h00", "p0", "q"};
    if (std::none_of(std::begin(allowed), std::end(allowed),
                     [&](const char* a) { return key == a; }))
      throw ConfigError("coeffs: unknown key '" + key + "'");
  }
  return k;
}

json coeffs_json(const CoefficientSet& k) {
  return {{"A00", k.A00}, {"A0r", k.A0r}, {"Arr", k.Arr}, {"B", k.B},
          {"c", k.c},     {"h00", k.h00}, {"p0", k.p0},   {"q", k.q}};
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::coupled: return "coupled";
    case Mode::wave_only: return "wave_only";
    case Mode::kg_only: return "kg_only";
    case Mode::linear_with_source: return "linear_with_source";
  }
  return "coupled";
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      double r_max = c.grid.r_max;
      int n = c.grid.n;
      read(g, "r_max", r_max);
      read(g, "n", n);
      // dr is a convenience alternative to n.
      if (g.contains("dr")) {
        const double dr = g.at("dr").get<double>();
        if (!(dr > 0.0)) throw ConfigError("grid: dr must be positive");
        n = static_cast<int>(std::lround(r_max / dr)) + 1;
      }
      c.grid = RadialGrid(r_max, n);
    }
    if (j.contains("time")) {
      const json& t = j.at("time");
      read(t, "t_final", c.t_final);
      read(t, "cfl", c.cfl);
      read(t, "stride", c.stride);
    }
    if (j.contains("mode")) c.mode = mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("coeffs")) c.coeffs = read_coeffs(j.at("coeffs"), c.coeffs);
    if (j.contains("data")) {
      const json& d = j.at("data");
      read(d, "epsilon", c.epsilon);
      if (d.contains("profile")) c.profile = profile_from_name(d.at("profile").get<std::string>());
    }
    if (j.contains("slices")) {
      const json& s = j.at("slices");
      read(s, "s_min", c.s_min);
      read(s, "s_max", c.s_max);
      read(s, "ds", c.ds);
    }
    if (j.contains("checks")) c.checks = j.at("checks").get<std::vector<std::string>>();
    if (j.contains("bootstrap")) {
      const json& b = j.at("bootstrap");
      read(b, "delta", c.bootstrap.delta);
      read(b, "n_eff", c.bootstrap.n_eff);
      if (b.contains("C0")) c.bootstrap.C0 = b.at("C0").get<double>();
      if (b.contains("C1")) c.bootstrap.C1 = b.at("C1").get<double>();
    }
    c.bootstrap.epsilon = c.epsilon;
    if (j.contains("rays")) {
      const json& r = j.at("rays");
      read(r, "count", c.rays);
      read(r, "s0", c.ray_s0);
    }
    if (j.contains("damping")) {
      const json& d = j.at("damping");
      if (d.contains("violated")) c.violated = read_coeffs(d.at("violated"), c.coeffs);
    }
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["grid"] = {{"r_max", c.grid.r_max}, {"n", c.grid.n}};
  j["time"] = {{"t_final", c.t_final}, {"cfl", c.cfl}, {"stride", c.stride}};
  j["mode"] = mode_name(c.mode);
  j["coeffs"] = coeffs_json(c.coeffs);
  j["data"] = {{"epsilon", c.epsilon},
               {"profile", c.profile == Profile::bump ? "bump" : "gaussian_truncated"}};
  j["slices"] = {{"s_min", c.s_min}, {"s_max", c.s_max}, {"ds", c.ds}};
  j["checks"] = c.checks;
  j["bootstrap"] = {{"delta", c.bootstrap.delta}, {"n_eff", c.bootstrap.n_eff}};
  if (c.bootstrap.C0) j["bootstrap"]["C0"] = *c.bootstrap.C0;
  if (c.bootstrap.C1) j["bootstrap"]["C1"] = *c.bootstrap.C1;
  j["rays"] = {{"count", c.rays}, {"s0", c.ray_s0}};
  if (c.violated) j["damping"] = {{"violated", coeffs_json(*c.violated)}};
  j["output"] = c.output.string();
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

}  // namespace wkg
