#include <doctest.h>

#include <cmath>

#include "wkg/bootstrap_monitor.hpp"
#include "wkg/errors.hpp"

using namespace wkg;

namespace {

// Synthetic reports: energies grow like s^{2δ'} and sup contributions are flat.
std::vector<SliceReport> synthetic(int n_eff, double growth, double scale) {
  std::vector<SliceReport> out;
  for (int i = 0; i <= 36; ++i) {
    SliceReport r;
    r.s = 2.0 + 0.5 * i;
    r.complete = true;
    const double g = std::pow(r.s / 2.0, 2.0 * growth);
    r.Epk_c_v.assign(n_eff + 1, std::vector<double>(n_eff + 1, 0.0));
    r.Epk_con_u.assign(n_eff + 1, std::vector<double>(n_eff + 1, 0.0));
    for (int p = 0; p <= n_eff; ++p)
      for (int k = 0; k <= p; ++k) {
        r.Epk_c_v[p][k] = scale * scale * g * (1 + k);
        r.Epk_con_u[p][k] = scale * scale * r.s * g * (1 + k);
      }
    r.A_slice.assign(n_eff + 1, scale);
    r.B_slice.assign(n_eff + 1, scale * (i < 5 ? 2.0 : 1.0));
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("sup quantities are running maxima") {
  const auto reps = synthetic(2, 0.0, 1e-3);
  const SupQuantities q = compute_sup_quantities(reps, 2);
  CHECK(q.n_eff() == 2);
  REQUIRE(q.s.size() == reps.size());
  for (std::size_t i = 1; i < q.s.size(); ++i)
    for (int k = 0; k <= 2; ++k) CHECK(q.B[k][i] >= q.B[k][i - 1]);
  CHECK(q.B[0].back() == doctest::Approx(2e-3));
}

TEST_CASE("energy table sums ranks") {
  const auto reps = synthetic(3, 0.0, 1.0);
  const EnergyTable t = energy_table(reps, 3);
  CHECK(t.Ec_v.size() == 4);
  // E^{N,k} carries k + 1; the total over k = 0..3 is 10.
  CHECK(t.total_c(0) == doctest::Approx(10.0));
}

TEST_CASE("bootstrap bounds on slowly growing energies") {
  BootstrapConfig cfg;
  cfg.n_eff = 2;
  cfg.epsilon = 0.01;
  const BootstrapReport ok = bootstrap_check(energy_table(synthetic(2, 0.01, 1e-3), 2), cfg);
  CHECK(ok.C1 == doctest::Approx(4.0 * ok.C0));
  CHECK(ok.refined_holds);
  CHECK(ok.fit_delta < 0.1);
  CHECK(ok.holds());

  // Energy roots growing like s need δ far above 0.1.
  const BootstrapReport fast = bootstrap_check(energy_table(synthetic(2, 1.0, 1e-3), 2), cfg);
  CHECK_FALSE(fast.holds());
  CHECK(fast.fit_delta > 0.1);
}

TEST_CASE("bootstrap configuration limits") {
  BootstrapConfig cfg;
  cfg.delta = 0.2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.delta = 0.05;
  cfg.n_eff = 4;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("recursion on a vanishing solution needs no constant") {
  const auto reps = synthetic(3, 0.0, 0.0);
  RecursionConfig rc;
  rc.epsilon = 0.01;
  rc.C0 = 1.0;
  rc.C1 = 4.0;
  const RecursionReport r =
      recursion_certify(compute_sup_quantities(reps, 3), energy_table(reps, 3), rc);
  CHECK(r.C == 0.0);
  CHECK(r.k0_structural);
  CHECK(r.holds());
  bool saw_k0 = false;
  for (const RecursionCheck& c : r.checks) {
    if (c.k == 0) {
      saw_k0 = true;
      CHECK(c.lower_order_terms == 0);
    }
  }
  CHECK(saw_k0);
}

TEST_CASE("recursion fits one constant on bounded tables") {
  const auto reps = synthetic(3, 0.02, 1e-3);
  RecursionConfig rc;
  rc.epsilon = 0.01;
  rc.C0 = 0.1;
  rc.C1 = 0.4;
  const RecursionReport r =
      recursion_certify(compute_sup_quantities(reps, 3), energy_table(reps, 3), rc);
  CHECK(std::isfinite(r.C));
  CHECK(r.C > 0.0);
  for (const RecursionCheck& c : r.checks) CHECK(c.C_min <= r.C * (1.0 + 1e-12));
}

TEST_CASE("k = 0 energy inequality survives a large constant") {
  // Tiny ε makes the fitted C large enough that the integrand power overflows.
  const auto reps = synthetic(2, 0.5, 1e-3);
  RecursionConfig rc;
  rc.epsilon = 1e-6;
  rc.C0 = 1.0;
  rc.C1 = 4.0;
  const RecursionReport r =
      recursion_certify(compute_sup_quantities(reps, 2), energy_table(reps, 2), rc);
  for (const RecursionCheck& c : r.checks)
    if (c.name == "energy_integral" && c.k == 0) CHECK(c.holds == (c.worst_ratio <= 1.0));
}

TEST_CASE("sharp decay needs slices past s = 15") {
  const auto reps = synthetic(1, 0.0, 1e-3);
  std::vector<SliceReport> short_run(reps.begin(), reps.begin() + 10);
  AxisMonitor axis;
  CHECK_THROWS_AS(sharp_decay_check(short_run, axis, SharpDecayConfig{}), RangeError);
}
