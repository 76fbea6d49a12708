#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "wkg/errors.hpp"
#include "wkg/history.hpp"
#include "wkg/initial_data.hpp"
#include "wkg/radial_grid.hpp"
#include "wkg/stencil.hpp"

using namespace wkg;

namespace {

// Frozen: 4π∫₀¹ exp(1 − 1/(1 − r²)) r² dr, 30-digit quadrature.
constexpr double kBumpMass = 1.1990039070192139;

double f(double t, double r) { return std::sin(0.7 * t) * std::cos(1.3 * r); }
double f_t(double t, double r) { return 0.7 * std::cos(0.7 * t) * std::cos(1.3 * r); }

History sampled_history(double dr, double dt, int levels, Retention ret = Retention::full,
                        std::size_t cap = 16) {
  const RadialGrid g(64 * dr, 65);
  History h(g, dt, ret, cap);
  for (int k = 0; k < levels; ++k) {
    FieldState s(2.0 + k * dt, g.n);
    for (int i = 0; i < g.n; ++i) {
      s.u()[i] = f(s.t, g.r(i));
      s.p()[i] = f_t(s.t, g.r(i));
    }
    h.append(s);
  }
  return h;
}

}  // namespace

TEST_CASE("bump profile") {
  CHECK(bump(0.0) == 1.0);
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(1.5) == 0.0);
  CHECK(bump(0.5) == doctest::Approx(std::exp(1.0 - 1.0 / 0.75)));
  CHECK(gaussian_truncated(1.0) == 0.0);
  CHECK(gaussian_truncated(0.0) == doctest::Approx(1.0));

  const int n = 20001;
  const double h = 1.0 / (n - 1);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = i * h;
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    sum += w * 4.0 * std::numbers::pi * r * r * bump(r);
  }
  CHECK(sum * h == doctest::Approx(kBumpMass).epsilon(1e-10));
}

TEST_CASE("initial data on the t = 2 slice") {
  const RadialGrid g(4.0, 401);
  const FieldState s = make_initial_data(g, 0.01);
  CHECK(s.t == kInitialTime);
  CHECK(s.u()[0] == doctest::Approx(0.01));
  CHECK(s.v()[50] == doctest::Approx(0.01 * bump(0.5)));
  for (int i = 0; i < g.n; ++i) {
    CHECK(s.p()[i] == 0.0);
    CHECK(s.q()[i] == 0.0);
  }
  CHECK(s.u()[200] == 0.0);
  CHECK_THROWS_AS(profile_from_name("square"), ConfigError);
}

TEST_CASE("grid and channel names") {
  CHECK_THROWS_AS(RadialGrid(1.0, 4), ConfigError);
  const RadialGrid g(10.0, 1001);
  CHECK(g.dr() == doctest::Approx(0.01));
  for (int c = 0; c < kChannelCount; ++c)
    CHECK(channel_from_name(channel_name(static_cast<Channel>(c))) == c);
  CHECK_THROWS_AS(channel_from_name("nope"), ArgumentError);
  CHECK(rate_of(kV) == kQ);
}

TEST_CASE("finite-difference weights reproduce polynomials") {
  std::vector<double> w(3 * 5);
  uniform_weights(1.5, 0, 5, 2, w);
  // x³ at 1.5: value 3.375, slope 6.75, curvature 9.
  double v[3] = {};
  for (int o = 0; o < 3; ++o)
    for (int j = 0; j < 5; ++j) v[o] += w[o * 5 + j] * j * j * j;
  CHECK(v[0] == doctest::Approx(3.375));
  CHECK(v[1] == doctest::Approx(6.75));
  CHECK(v[2] == doctest::Approx(9.0));
}

TEST_CASE("history interpolation of a smooth field") {
  const double dr = 0.05, dt = 0.02;
  const History h = sampled_history(dr, dt, 40);
  for (double t : {2.1, 2.33, 2.5}) {
    for (double r : {0.0, 0.41, 1.77}) {
      CHECK(h.interp(kU, t, r) == doctest::Approx(f(t, r)).epsilon(1e-5));
      CHECK(h.interp(kU, t, r, 1, 0) == doctest::Approx(f_t(t, r)).epsilon(1e-4));
      CHECK(h.interp(kU, t, r, 0, 1) ==
            doctest::Approx(-1.3 * std::sin(0.7 * t) * std::sin(1.3 * r)).epsilon(1e-3));
    }
  }
  // Stencils at the origin reach r < 0 through even reflection.
  CHECK(h.interp(kU, 2.2, 0.01) == doctest::Approx(f(2.2, 0.01)).epsilon(1e-5));
  CHECK_THROWS_AS(h.interp(kU, 2.2, -0.3), RangeError);
  const Jet j = h.jet(kU, 2.3, 0.8, 3);
  CHECK(j(0, 2) == doctest::Approx(-1.69 * f(2.3, 0.8)).epsilon(1e-3));
  CHECK(j(1, 1) == doctest::Approx(-0.91 * std::cos(0.7 * 2.3) * std::sin(1.3 * 0.8)).epsilon(1e-3));
  CHECK_THROWS_AS(h.interp(kU, 5.0, 0.5), RangeError);
  // Channels that were never stored read as zero.
  CHECK(h.interp(kUL, 2.2, 0.5) == 0.0);
}

TEST_CASE("interpolation error is second order or better") {
  auto err = [](double dr) {
    const History h = sampled_history(dr, dr, 30);
    return std::abs(h.interp(kU, 2.0 + 11.37 * dr, 17.53 * dr, 0, 1) -
                    (-1.3 * std::sin(0.7 * (2.0 + 11.37 * dr)) * std::sin(1.3 * 17.53 * dr)));
  };
  CHECK(std::log2(err(0.04) / err(0.02)) > 1.8);
}

TEST_CASE("ring retention drops old levels") {
  const History h = sampled_history(0.05, 0.02, 40, Retention::ring, 8);
  CHECK(h.count() == 40);
  CHECK(h.first_index() == 32);
  CHECK_THROWS_AS(h.level(0), RangeError);
  CHECK(h.interp(kU, h.t_last() - 0.05, 1.0) ==
        doctest::Approx(f(h.t_last() - 0.05, 1.0)).epsilon(1e-5));
}

TEST_CASE("history rejects non-uniform levels") {
  const RadialGrid g(3.2, 65);
  History h(g, 0.1);
  h.append(FieldState(2.0, g.n));
  CHECK_THROWS_AS(h.append(FieldState(2.15, g.n)), ArgumentError);
}

TEST_CASE("checkpoint round trip") {
  const History h = sampled_history(0.05, 0.02, 12);
  const auto dir = std::filesystem::temp_directory_path() / "wkg_unit_ckpt";
  std::filesystem::create_directories(dir);
  for (auto fmt : {CheckpointFormat::binary, CheckpointFormat::csv}) {
    const auto path = dir / (fmt == CheckpointFormat::binary ? "h.bin" : "h.csv");
    h.write_checkpoint(path, fmt);
    const History back = History::read_checkpoint(path);
    CHECK(back.count() == h.count());
    CHECK(back.dt() == h.dt());
    CHECK(back.has_channel(kU));
    CHECK_FALSE(back.has_channel(kUL));
    for (std::size_t k = 0; k < h.count(); ++k)
      for (int i = 0; i < h.grid().n; i += 7) CHECK(back.at(kU, k, i) == h.at(kU, k, i));
  }
  std::filesystem::remove_all(dir);
}
