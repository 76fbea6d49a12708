#include <doctest.h>

#include <cmath>

#include "wkg/errors.hpp"
#include "wkg/evolver.hpp"
#include "wkg/initial_data.hpp"
#include "wkg/slice_diag.hpp"
#include "wkg/z_operators.hpp"

using namespace wkg;

namespace {

double f(double t, double r) { return std::sin(0.7 * t) * std::cos(1.3 * r); }
double f_t(double t, double r) { return 0.7 * std::cos(0.7 * t) * std::cos(1.3 * r); }
double f_r(double t, double r) { return -1.3 * std::sin(0.7 * t) * std::sin(1.3 * r); }

History analytic_history(double t_end) {
  const double dr = 0.02;
  const RadialGrid g(t_end + 2.0, static_cast<int>(std::lround((t_end + 2.0) / dr)) + 1);
  const double dt = 0.01;
  History h(g, dt);
  const int levels = static_cast<int>(std::lround((t_end + 0.2 - 2.0) / dt)) + 1;
  for (int k = 0; k < levels; ++k) {
    FieldState s(2.0 + k * dt, g.n);
    for (int i = 0; i < g.n; ++i) {
      s.u()[i] = s.v()[i] = f(s.t, g.r(i));
      s.p()[i] = s.q()[i] = f_t(s.t, g.r(i));
    }
    h.append(s);
  }
  return h;
}

std::vector<SliceReport> free_slices(double dr) {
  const double t_end = 9.0;
  const RadialGrid g(t_end + 3.0, static_cast<int>(std::lround((t_end + 3.0) / dr)) + 1);
  CoefficientSet k;
  k.p0 = 0.0;
  Evolver e(g, k, Mode::coupled);
  FieldState s = make_initial_data(g, 0.01);
  SliceMonitorConfig mc;
  mc.s_values = {2.0, 3.0, 4.0};
  mc.n_eff = -1;
  SliceMonitor mon(g, mc);
  RunObserver* obs[] = {&mon};
  e.run(s, RunPlan{t_end, 5, Retention::ring, 16}, obs);
  return mon.reports();
}

}  // namespace

TEST_CASE("word enumeration") {
  CHECK(canonical_words(0).size() == 1);
  CHECK(canonical_words(2).size() == 10);
  CHECK(canonical_words(3).size() == 20);
  const auto w = canonical_words(3);
  for (std::size_t i = 1; i < w.size(); ++i) {
    CHECK(w[i - 1].order() <= w[i].order());
  }
  CHECK(Word{1, 0, 2}.label() == "t1r0L2");
}

TEST_CASE("boost on jets agrees with nested differences") {
  const History h = analytic_history(6.0);
  const double t = 4.0, r = 1.3;
  const Jet j = h.jet(kU, t, r, 3);
  const Jet L = boost_jet(j, t, r);
  const double exact = r * f_t(t, r) + t * f_r(t, r);
  CHECK(L(0, 0) == doctest::Approx(exact).epsilon(1e-4));
  CHECK(ZField(h, kU, "L").value(t, r) == doctest::Approx(exact).epsilon(1e-3));
  const Jet tl = apply_word(j, t, r, Word{1, 0, 1});
  CHECK(ZField(h, kU, "tL").value(t, r) == doctest::Approx(tl(0, 0)).epsilon(1e-3));
  CHECK_THROWS_AS(ZField(h, kU, "LLLL"), CapabilityError);
}

TEST_CASE("slice energies: cross form equals the good-derivative form") {
  const History h = analytic_history(6.0);
  const SliceData sl = extract_slice(h, 3.0);
  REQUIRE(sl.size() > 10);
  for (int i = 0; i < sl.size(); i += 11) {
    CHECK(sl.t[i] == doctest::Approx(std::sqrt(9.0 + sl.r[i] * sl.r[i])));
    CHECK(sl.val[kU][i] == doctest::Approx(f(sl.t[i], sl.r[i])).epsilon(1e-6));
    CHECK(sl.dt[kU][i] == doctest::Approx(f_t(sl.t[i], sl.r[i])).epsilon(1e-4));
  }
  const double a = energy_standard(sl, kV, 1.0);
  const double b = energy_standard_underline(sl, kV, 1.0);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
  CHECK(energy_conformal(sl, kU) > 0.0);
}

TEST_CASE("slice node mask") {
  const RadialGrid g(30.0, 3001);
  const int n = slice_node_count(g, 4.0, 2);
  const double r_last = g.r(n - 1);
  CHECK(r_last < std::sqrt(16.0 + r_last * r_last) - 1.0 - 2.0 * g.dr());
  const double r_next = g.r(n);
  CHECK_FALSE(r_next < std::sqrt(16.0 + r_next * r_next) - 1.0 - 2.0 * g.dr());
}

TEST_CASE("ratio bookkeeping") {
  CHECK(make_ks_ratio(0.0, 0.0).degenerate);
  CHECK(make_ks_ratio(1.0, 0.0).anomaly);
  CHECK(make_ks_ratio(1.0, 4.0).ratio == 0.25);
}

TEST_CASE("free-field slice energy drift converges at second order") {
  const auto coarse = free_slices(0.02);
  const auto fine = free_slices(0.01);
  REQUIRE(coarse.size() == 3);
  REQUIRE(fine.size() == 3);
  auto drift = [](const std::vector<SliceReport>& r) {
    return std::abs(r[2].Ec_u - r[0].Ec_u) / r[0].Ec_u;
  };
  CHECK(fine[0].Ec_u == doctest::Approx(coarse[0].Ec_u).epsilon(1e-3));
  CHECK(drift(fine) < 2e-3);
  CHECK(std::log2(drift(coarse) / drift(fine)) > 1.6);
  CHECK(fine[1].density_gap < 1e-12 * fine[1].Ec_u + 1e-18);
}

TEST_CASE("slices outside a stored run are rejected") {
  const History h = analytic_history(4.0);
  SliceMonitorConfig mc;
  mc.s_values = {4.0};
  CHECK_THROWS_AS(evaluate_slices(h, mc), RangeError);
}
