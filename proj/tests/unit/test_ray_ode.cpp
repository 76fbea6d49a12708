#include <doctest.h>

#include <cmath>

#include "wkg/errors.hpp"
#include "wkg/evolver.hpp"
#include "wkg/initial_data.hpp"
#include "wkg/ray_ode.hpp"

using namespace wkg;

TEST_CASE("box identity residual vanishes at second order") {
  const ScalarField v = [](double t, double r) {
    return std::exp(-0.1 * t) * std::cos(0.8 * r) + 0.01 * t * r * r;
  };
  const SpacetimePoint p{7.0, 3.0};
  const double a = box_identity_residual(v, p, 0.02);
  const double b = box_identity_residual(v, p, 0.01);
  CHECK(a < 1e-3);
  CHECK(std::log2(a / b) == doctest::Approx(2.0).epsilon(0.1));
  CHECK_THROWS_AS(box_identity_residual(v, SpacetimePoint{3.0, 2.5}, 0.01), DomainError);
}

TEST_CASE("constant-coefficient ODE matches the closed form") {
  for (double d : {-0.5, 0.0, -1.2}) {
    OdeProblem prob;
    prob.c = 1.0;
    prob.lambda0 = 2.0;
    prob.lambda1 = 12.0;
    prob.D = [d](double) { return d; };
    prob.f = [](double) { return 0.0; };
    prob.w0 = 0.3;
    prob.wp0 = -0.7;
    const OdeSolution sol = ode_integrate(prob, 1e-3);
    double err = 0.0;
    for (std::size_t k = 0; k < sol.w.size(); ++k)
      err = std::max(err, std::abs(sol.w[k] - ode_closed_form(1.0, d, 0.3, -0.7,
                                                              sol.lambda[k] - 2.0)));
    CHECK(err < 1e-8);
    CHECK(sol.hypothesis_violated == (std::abs(d) > 1.0));
    CHECK(sol.reassembly_error < 1e-10);
  }
}

TEST_CASE("variable damping: diagonalized channels reassemble the solution") {
  OdeProblem prob;
  prob.c = 1.0;
  prob.D = [](double l) { return -0.5 * std::sin(l) * std::sin(l); };
  prob.f = [](double l) { return std::cos(2.0 * l) / l; };
  prob.w0 = 1.0;
  const OdeSolution sol = ode_integrate(prob, 1e-3);
  CHECK(sol.diagonalized);
  CHECK(sol.reassembly_error < 1e-10);
}

TEST_CASE("barrier bound and its hypotheses") {
  OdeProblem prob;
  prob.c = 1.0;
  prob.D = [](double l) { return 0.3 * std::sin(l); };
  prob.S = [](double l) { return -std::max(0.3 * std::sin(l), 0.0); };
  prob.f = [](double l) { return 0.1 / (l * l); };
  prob.w0 = 0.5;
  const BarrierReport rep = barrier_bound_check(prob);
  CHECK(rep.holds);
  CHECK(rep.K <= rep.bound);
  CHECK(rep.C_S > 0.0);

  OdeProblem bad = prob;
  bad.S = [](double) { return 0.0; };
  CHECK_THROWS_AS(barrier_bound_check(bad), PreconditionError);
  OdeProblem tight = prob;
  tight.C_S = 0.01;
  CHECK_THROWS_AS(barrier_bound_check(tight), PreconditionError);
}

namespace {

RayTrace free_ray(double dr) {
  const double t_end = 9.0;
  const RadialGrid g(t_end + 3.0, static_cast<int>(std::lround((t_end + 3.0) / dr)) + 1);
  CoefficientSet k;
  k.p0 = 0.0;
  Evolver e(g, k, Mode::coupled);
  FieldState s = make_initial_data(g, 0.01);
  const History h = e.run(s, RunPlan{t_end, 5});
  RaySpec spec;
  spec.coupling = RayCoupling::none;
  spec.step = 0.008;
  return ray_consistency(h, 7.0, 2.0, spec);
}

}  // namespace

TEST_CASE("ray identity defect of a free Klein-Gordon run converges") {
  const RayTrace a = free_ray(0.02);
  const RayTrace b = free_ray(0.01);
  REQUIRE(a.complete());
  REQUIRE(a.lambda.size() == b.lambda.size());
  CHECK(a.lambda.back() == doctest::Approx(a.s));
  CHECK(b.max_residual() < 0.25 * a.max_residual());
}

TEST_CASE("piecewise-linear sampling") {
  const auto g = sampled(1.0, 0.5, {0.0, 1.0, 4.0});
  CHECK(g(1.25) == doctest::Approx(0.5));
  CHECK(g(1.75) == doctest::Approx(2.5));
  CHECK(g(9.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(sampled(0.0, 1.0, {1.0}), ArgumentError);
}
