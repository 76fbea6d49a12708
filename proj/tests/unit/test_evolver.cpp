#include <doctest.h>

#include <cmath>
#include <limits>

#include "wkg/errors.hpp"
#include "wkg/evolver.hpp"
#include "wkg/initial_data.hpp"

using namespace wkg;

namespace {

CoefficientSet free_fields() {
  CoefficientSet k;
  k.p0 = 0.0;
  return k;
}

// Radial free wave with data (χ, 0) at t = 2: at the centre u = (τχ(τ))′, τ = t − 2.
double kirchhoff_axis(double tau) {
  const double x = 1.0 - tau * tau;
  if (x <= 0.0) return 0.0;
  return bump(tau) * (1.0 - 2.0 * tau * tau / (x * x));
}

double axis_error(double dr, double t_final) {
  const RadialGrid g(6.0, static_cast<int>(std::lround(6.0 / dr)) + 1);
  Evolver e(g, free_fields(), Mode::coupled);
  FieldState s = make_initial_data(g, 1.0);
  const History h = e.run(s, RunPlan{t_final, 1});
  return std::abs(h.at(kU, h.count() - 1, 0) - kirchhoff_axis(t_final - 2.0));
}

}  // namespace

TEST_CASE("spatial operator is exact on r^2") {
  const RadialGrid g(2.0, 101);
  FieldState s(2.0, g.n);
  for (int i = 0; i < g.n; ++i) {
    s.u()[i] = g.r(i) * g.r(i);
    s.v()[i] = g.r(i) * g.r(i);
  }
  const FieldState ds = rhs(s, g, free_fields(), Mode::coupled);
  for (int i = 0; i < g.n - 1; ++i) {
    CHECK(ds.p()[i] == doctest::Approx(6.0));
    CHECK(ds.q()[i] == doctest::Approx(6.0 - g.r(i) * g.r(i)));
    CHECK(ds.u()[i] == 0.0);
  }
}

TEST_CASE("free wave matches the axis solution at second order") {
  const double e1 = axis_error(0.02, 2.6);
  const double e2 = axis_error(0.01, 2.6);
  CHECK(e2 < 1e-3);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("discrete flat energy of the free wave is conserved") {
  const RadialGrid g(16.0, 801);
  const double dr = g.dr();
  Evolver e(g, free_fields(), Mode::coupled);
  FieldState s = make_initial_data(g, 1.0);
  auto energy = [&](const FieldState& f) {
    double E = 0.0;
    for (int i = 0; i + 1 < g.n; ++i) {
      const double du = f.u()[i + 1] - f.u()[i];
      E += g.r(i) * g.r(i) * f.p()[i] * f.p()[i] * dr + i * (i + 1.0) * du * du * dr;
    }
    return E;
  };
  FieldState start = s;
  // The initial data have p = 0; take one step so both terms are populated.
  e.step(start, 0.4 * dr);
  start.t = 2.0 + 0.4 * dr;
  const double E0 = energy(start);
  s = start;
  const History h = e.run(s, RunPlan{12.0, 5});
  CHECK(std::abs(energy(s) - E0) / E0 < 1e-4);
  CHECK(h.t_last() == doctest::Approx(12.0));
}

TEST_CASE("zero data stay zero in every mode") {
  const RadialGrid g(8.0, 201);
  CoefficientSet k;
  k.A00 = 1.0;
  k.B = -1.0;
  for (Mode m : {Mode::coupled, Mode::wave_only, Mode::kg_only}) {
    Evolver e(g, k, m);
    FieldState s = make_initial_data(g, 0.0);
    e.run(s, RunPlan{4.0, 5});
    for (int c = 0; c < 4; ++c)
      for (double x : s.ch[c]) CHECK(x == 0.0);
  }
}

TEST_CASE("active region follows the cone") {
  const RadialGrid g(10.0, 1001);
  Evolver e(g, CoefficientSet{}, Mode::coupled);
  CHECK(g.r(e.active_last(2.0)) >= 2.0 - 1e-12);
  CHECK(g.r(e.active_last(2.0)) <= 2.0 + 2.0 * g.dr() + 1e-12);
  CHECK(e.active_last(50.0) == g.n - 1);
}

TEST_CASE("non-finite values are reported with their location") {
  const RadialGrid g(8.0, 201);
  Evolver e(g, CoefficientSet{}, Mode::coupled);
  FieldState s = make_initial_data(g, 0.01);
  s.u()[10] = std::numeric_limits<double>::quiet_NaN();
  try {
    e.run(s, RunPlan{3.0, 1});
    FAIL("expected NumericError");
  } catch (const NumericError& err) {
    CHECK(err.t() == doctest::Approx(2.0));
    CHECK(err.r() == doctest::Approx(g.r(10)));
  }
}

TEST_CASE("linear wave with a point source") {
  const RadialGrid g(10.0, 501);
  FieldState data(2.0, g.n, 2);
  // □φ = 1 with zero data: φ = (t − 2)²/2 away from the boundary.
  const History h = solve_linear_wave(
      g, from_point_source([](double, double) { return 1.0; }), data, RunPlan{4.0, 5},
      EvolverOptions{0.4, false});
  CHECK(h.at(kU, h.count() - 1, 50) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("run rejects bad plans") {
  const RadialGrid g(8.0, 201);
  Evolver e(g, CoefficientSet{}, Mode::coupled);
  FieldState s = make_initial_data(g, 0.01);
  CHECK_THROWS_AS(e.run(s, RunPlan{1.0, 5}), ConfigError);
  CHECK_THROWS_AS(e.run(s, RunPlan{3.0, 0}), ConfigError);
}
