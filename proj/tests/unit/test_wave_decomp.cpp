#include <doctest.h>

#include <cmath>

#include "wkg/errors.hpp"
#include "wkg/evolver.hpp"
#include "wkg/initial_data.hpp"
#include "wkg/wave_decomp.hpp"

using namespace wkg;

namespace {

CoefficientSet damped() {
  CoefficientSet k;
  k.B = -1.0;
  return k;
}

SignReport split_run(double dr, double t_end) {
  const RadialGrid g(t_end + 3.0, static_cast<int>(std::lround((t_end + 3.0) / dr)) + 1);
  Evolver e(g, damped(), Mode::coupled);
  FieldState s = make_initial_data(g, 0.05);
  enable_decomposition(e, s);
  DecompositionMonitor mon(decomposition_kappa(damped()));
  RunObserver* obs[] = {&mon};
  e.run(s, RunPlan{t_end, 5, Retention::ring, 16}, obs);
  return mon.report(dr);
}

}  // namespace

TEST_CASE("kappa and the cutoff") {
  CoefficientSet k = damped();
  k.c = 2.0;
  CHECK(decomposition_kappa(k) == doctest::Approx(-1.0 / 8.0));
  CHECK(cone_cutoff(0.5) == 0.0);
  CHECK(cone_cutoff(1.0) == 0.0);
  CHECK(cone_cutoff(2.0) == 1.0);
  CHECK(cone_cutoff(1.5) > 0.0);
  CHECK(cone_cutoff(1.5) < 1.0);
  CHECK(probe_source(0.25, 0.25, 1.0, 10.0, 9.5) == 0.0);
  CHECK(probe_source(0.25, 0.25, 1.0, 10.0, 2.0) ==
        doctest::Approx(std::pow(10.0, -2.25) * std::pow(8.0, -0.75)));
}

TEST_CASE("auxiliary data carry the quadratic correction") {
  const RadialGrid g(6.0, 301);
  FieldState s = make_initial_data(g, 0.1);
  set_decomposition_data(s, damped());
  const double kappa = decomposition_kappa(damped());
  for (int i = 0; i < g.n; i += 13) {
    CHECK(s.ch[kUL][i] == doctest::Approx(s.u()[i] + kappa * s.v()[i] * s.v()[i]));
    CHECK(s.ch[kUG][i] == 0.0);
    CHECK(s.ch[kWB][i] == 0.0);
  }
}

TEST_CASE("split recombines and the bad part keeps its sign") {
  // dr = 0.02 is still pre-asymptotic for the split.
  const SignReport a = split_run(0.01, 10.0);
  const SignReport b = split_run(0.005, 10.0);
  CHECK(a.holds());
  CHECK(b.holds());
  CHECK(b.max_residual < a.max_residual);
  CHECK(std::log2(a.max_residual / b.max_residual) > 1.6);
  CHECK(b.levels > 0);
}

TEST_CASE("probe matches the axis quadrature") {
  // t·u(t, 0) = t∫(t − τ)f(τ, t − τ)dτ by adaptive quadrature, μ = ν = 1/4, t = 22.
  constexpr double kAxis22 = 0.8729329186850112;
  ProbeOptions po;
  po.t_final = 22.0;
  po.grid = RadialGrid(25.0, 2501);
  const ProbeResult r = linear_decay_probe(0.25, 0.25, 1.0, po);
  REQUIRE_FALSE(r.t.empty());
  CHECK(r.t.back() == doctest::Approx(22.0).epsilon(1e-3));
  CHECK(r.weighted_sup.back() == doctest::Approx(kAxis22).epsilon(2e-3));
  CHECK_THROWS_AS(linear_decay_probe(0.25, 0.0, 1.0, po), ArgumentError);
}

TEST_CASE("sign certificate needs the damping condition") {
  CoefficientSet bad;
  bad.B = 1.0;
  CHECK_THROWS_AS(require_damping(bad, 2.0, 20.0), PreconditionError);
  CHECK_NOTHROW(require_damping(damped(), 2.0, 20.0));
}
