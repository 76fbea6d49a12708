#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "wkg/errors.hpp"
#include "wkg/fit.hpp"
#include "wkg/pipeline.hpp"
#include "wkg/run_config.hpp"

using namespace wkg;
using nlohmann::json;

TEST_CASE("defaults and derived slice list") {
  const RunConfig c = parse_config(json::object());
  CHECK(c.grid.dr() == doctest::Approx(1.0 / 200.0));
  // t = 25 covers complete slices up to s = 7.
  CHECK(c.covered_s_max() == doctest::Approx(7.0));
  const auto s = c.s_values();
  CHECK(s.front() == 2.0);
  CHECK(s.back() == doctest::Approx(7.0));
  CHECK(s.size() == 11);
}

TEST_CASE("config sections are read") {
  const json j = {{"grid", {{"r_max", 43.0}, {"dr", 0.01}}},
                  {"time", {{"t_final", 40.0}, {"cfl", 0.25}}},
                  {"coeffs", {{"B", -1.0}, {"c", 2.0}}},
                  {"data", {{"epsilon", 0.02}, {"profile", "gaussian_truncated"}}},
                  {"checks", {"ks", "bootstrap"}},
                  {"bootstrap", {{"delta", 0.04}, {"n_eff", 2}}},
                  {"output", "out/x"}};
  const RunConfig c = parse_config(j);
  CHECK(c.grid.n == 4301);
  CHECK(c.cfl == 0.25);
  CHECK(c.coeffs.B == -1.0);
  CHECK(c.coeffs.c == 2.0);
  CHECK(c.coeffs.p0 == 1.0);
  CHECK(c.profile == Profile::gaussian_truncated);
  CHECK(c.bootstrap.epsilon == 0.02);
  CHECK(c.wants("ks"));
  CHECK_FALSE(c.wants("rays"));
  // Round trip.
  const RunConfig back = parse_config(to_json(c));
  CHECK(back.grid.n == c.grid.n);
  CHECK(back.coeffs.c == c.coeffs.c);
  CHECK(back.checks == c.checks);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
  CHECK_THROWS_AS(parse_config({{"coeffs", {{"Z", 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"checks", {"telepathy"}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"time", {{"t_final", 80.0}}}}), ConfigError);  // boundary too close
  CHECK_THROWS_AS(parse_config({{"time", {{"cfl", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"grid", {{"n", "many"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"bootstrap", {{"delta", 0.5}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"coeffs", {{"c", 0.0}}}}), ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "wkg_bad.json";
  std::ofstream(path) << "{\"grid\": ";
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config("/nonexistent/wkg.json"), ConfigError);
}

TEST_CASE("pipeline maps a bad config to exit code 2") {
  RunConfig c;
  c.cfl = 5.0;
  const PipelineResult r = run_pipeline(c);
  CHECK(r.exit_code == 2);
  CHECK_FALSE(r.error.empty());
}

TEST_CASE("property suites through the pipeline") {
  RunConfig c;
  c.checks = {"frame", "box_identity", "ode"};
  c.seed = 3;
  const PipelineResult r = run_pipeline(c);
  CHECK(r.exit_code == 0);
  REQUIRE(r.checks.size() == 3);
  for (const CheckResult& k : r.checks) CHECK(k.passed());
}

TEST_CASE("line fits") {
  const std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -1.5));
  const LineFit f = fit_loglog(x, y, 0.0, 100.0);
  CHECK(f.slope == doctest::Approx(-1.5));
  CHECK(f.points == 4);
  CHECK(relative_variation(std::vector<double>{1.0, 1.2, 0.8}) == doctest::Approx(0.5));
  CHECK(relative_drift(std::vector<double>{1.0, 1.1, 0.95}, 1.0) == doctest::Approx(0.1));
}
