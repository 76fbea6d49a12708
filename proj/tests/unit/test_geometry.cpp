#include <doctest.h>

#include <cmath>
#include <random>

#include "wkg/errors.hpp"
#include "wkg/frame_geometry.hpp"

using namespace wkg;

namespace {

SpacetimePoint random_cone_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ut(2.0, 60.0), uf(0.0, 1.0);
  const double t = ut(rng);
  return {t, (t - 1.0) * uf(rng)};
}

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 d{g(rng), g(rng), g(rng)};
  const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  for (double& x : d) x /= n;
  return d;
}

}  // namespace

TEST_CASE("transition matrices are mutually inverse") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const SpacetimePoint p = random_cone_point(rng);
    const Vec3 d = random_direction(rng);
    const Mat4 id = matmul(transition_phi(p, d), transition_psi(p, d));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(std::abs(id[i][j] - (i == j ? 1.0 : 0.0)) < 1e-13);
  }
}

TEST_CASE("underline contraction of the Minkowski form is (s/t)^2") {
  CoefficientSet m;
  m.A00 = 1.0;
  m.Arr = -1.0;
  for (double t : {2.0, 5.5, 40.0})
    for (double f : {0.0, 0.3, 0.99}) {
      const SpacetimePoint p{t, f * (t - 1.0)};
      const double st = p.s() / t;
      CHECK(underline_contract(m, p) == doctest::Approx(st * st).epsilon(1e-13));
    }
}

TEST_CASE("damping margin has the sign of the damping condition") {
  CoefficientSet k;
  k.B = -1.0;
  CHECK(damping_sweep(k, 2.0, 50.0).holds());
  k.B = 1.0;
  const DampingSweep bad = damping_sweep(k, 2.0, 50.0);
  CHECK_FALSE(bad.holds());
  CHECK(bad.max_margin > 0.0);
  // A̲00 alone can also break it.
  CoefficientSet a;
  a.A00 = 0.5;
  CHECK_FALSE(damping_sweep(a, 2.0, 50.0).holds());
}

TEST_CASE("rays stay on the hyperboloid through the base point direction") {
  const double t = 10.0, r = 6.0, s = 8.0;
  const SpacetimePoint base = ray_point(t, r, s);
  CHECK(base.t == doctest::Approx(t));
  CHECK(base.r == doctest::Approx(r));
  const SpacetimePoint half = ray_point(t, r, 4.0);
  CHECK(half.s() == doctest::Approx(4.0));
  CHECK(half.r / half.t == doctest::Approx(r / t));
  // Near the axis the ray starts on H_2; close to the cone it starts on r = t − 1.
  CHECK(ray_lambda0(10.0, 4.0, 2.0) == doctest::Approx(2.0));
  CHECK(ray_lambda0(10.0, 9.0, 2.0) == doctest::Approx(std::sqrt(19.0)));
  const SpacetimePoint edge = ray_point(10.0, 9.0, std::sqrt(19.0));
  CHECK(edge.t - edge.r == doctest::Approx(1.0));
  CHECK_THROWS_AS(ray_point(3.0, 3.0, 1.0), DomainError);
}

TEST_CASE("coefficient validation") {
  CoefficientSet k;
  k.c = 0.0;
  CHECK_THROWS_AS(k.validate(), ConfigError);
  k.c = 1.0;
  CHECK_NOTHROW(k.validate());
}
