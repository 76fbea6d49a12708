#include "wkg/bootstrap_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "wkg/errors.hpp"
#include "wkg/fit.hpp"

namespace wkg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cumulative trapezoid of g over the grid x, starting at x[0].
std::vector<double> cumulative(const std::vector<double>& x, const std::vector<double>& g) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (g[i] + g[i - 1]);
  return out;
}

}  // namespace

void BootstrapConfig::validate() const {
  if (n_eff < 0 || n_eff > 3) throw ConfigError("bootstrap: n_eff must lie in [0, 3]");
  if (!(delta > 0.0 && delta < 0.1)) throw ConfigError("bootstrap: delta must lie in (0, 0.1)");
  if (!(epsilon >= 0.0)) throw ConfigError("bootstrap: epsilon must be nonnegative");
  if (C0 && C1 && !(*C1 > *C0)) throw ConfigError("bootstrap: C1 must exceed C0");
  if (!(s_hi > s_lo)) throw ConfigError("bootstrap: empty window");
}

SupQuantities compute_sup_quantities(const std::vector<SliceReport>& reports, int n_eff) {
  if (n_eff > 3) throw CapabilityError("sup quantities: order above 3");
  SupQuantities q;
  q.A.assign(n_eff + 1, {});
  q.B.assign(n_eff + 1, {});
  for (const SliceReport& r : reports) {
    if (!r.complete) continue;
    if (static_cast<int>(r.A_slice.size()) < n_eff + 1)
      throw CapabilityError("sup quantities: slices carry fewer word orders than requested");
    const bool first = q.s.empty();
    q.s.push_back(r.s);
    for (int k = 0; k <= n_eff; ++k) {
      // Running max in s, then in k.
      double a = first ? r.A_slice[k] : std::max(q.A[k].back(), r.A_slice[k]);
      double b = first ? r.B_slice[k] : std::max(q.B[k].back(), r.B_slice[k]);
      if (k > 0) {
        a = std::max(a, q.A[k - 1].back());
        b = std::max(b, q.B[k - 1].back());
      }
      q.A[k].push_back(a);
      q.B[k].push_back(b);
    }
  }
  return q;
}

SupQuantities compute_sup_quantities(const History& h, const SliceMonitorConfig& cfg) {
  if (cfg.n_eff > 3) throw CapabilityError("sup quantities: order above 3");
  return compute_sup_quantities(evaluate_slices(h, cfg), cfg.n_eff);
}

double EnergyTable::total_con(std::size_t i) const {
  double e = 0.0;
  for (const auto& row : Econ_u) e += row[i];
  return e;
}

double EnergyTable::total_c(std::size_t i) const {
  double e = 0.0;
  for (const auto& row : Ec_v) e += row[i];
  return e;
}

EnergyTable energy_table(const std::vector<SliceReport>& reports, int n_eff) {
  EnergyTable t;
  t.n_eff = n_eff;
  t.Econ_u.assign(n_eff + 1, {});
  t.Ec_v.assign(n_eff + 1, {});
  for (const SliceReport& r : reports) {
    if (!r.complete) continue;
    if (static_cast<int>(r.Epk_c_v.size()) < n_eff + 1)
      throw CapabilityError("energy table: slices carry fewer word orders than requested");
    t.s.push_back(r.s);
    for (int k = 0; k <= n_eff; ++k) {
      t.Econ_u[k].push_back(r.Epk_con_u[n_eff][k]);
      t.Ec_v[k].push_back(r.Epk_c_v[n_eff][k]);
    }
  }
  return t;
}

BootstrapReport bootstrap_check(const EnergyTable& table, const BootstrapConfig& cfg) {
  cfg.validate();
  BootstrapReport rep;
  rep.delta = cfg.delta;
  rep.epsilon = cfg.epsilon;
  if (table.s.empty()) return rep;
  const double eps = cfg.epsilon;
  const auto con_half = [&](std::size_t i) { return std::sqrt(table.total_con(i)); };
  const auto c_half = [&](std::size_t i) { return std::sqrt(table.total_c(i)); };

  if (cfg.C0) {
    rep.C0 = *cfg.C0;
  } else if (eps > 0.0) {
    rep.C0 = std::max(con_half(0), c_half(0)) / eps;
  }
  rep.C1 = cfg.C1 ? *cfg.C1 : 4.0 * rep.C0;

  const auto fits = [&](std::size_t i, double C, double d) {
    const double s = table.s[i];
    return con_half(i) <= C * eps * std::pow(s, 0.5 + d) && c_half(i) <= C * eps * std::pow(s, d);
  };

  double fit_C1 = 0.0, fit_delta = 0.0;
  const double half = 0.5 * rep.C1;
  for (std::size_t i = 0; i < table.s.size(); ++i) {
    const double s = table.s[i];
    BootstrapRow row;
    row.s = s;
    row.con_half = con_half(i);
    row.c_half = c_half(i);
    row.bound = fits(i, rep.C1, cfg.delta);
    row.refined = fits(i, half, cfg.delta);
    if (!row.bound && !rep.first_failure_s) rep.first_failure_s = s;
    rep.rows.push_back(row);
    if (s < cfg.s_lo || s > cfg.s_hi) continue;
    if (eps > 0.0) {
      fit_C1 = std::max({fit_C1, row.con_half / (eps * std::pow(s, 0.5 + cfg.delta)),
                         row.c_half / (eps * std::pow(s, cfg.delta))});
      if (half > 0.0 && s > 1.0) {
        const double ls = std::log(s);
        if (row.con_half > 0.0)
          fit_delta = std::max(fit_delta, std::log(row.con_half / (half * eps)) / ls - 0.5);
        if (row.c_half > 0.0)
          fit_delta = std::max(fit_delta, std::log(row.c_half / (half * eps)) / ls);
      } else if (row.con_half > 0.0 || row.c_half > 0.0) {
        fit_delta = kInf;
      }
    }
  }
  rep.fit_C1 = fit_C1;
  rep.fit_delta = fit_delta;
  rep.refined_holds = std::isfinite(fit_delta);
  for (std::size_t i = 0; i < table.s.size() && rep.refined_holds; ++i) {
    if (table.s[i] < cfg.s_lo || table.s[i] > cfg.s_hi) continue;
    // Guards the log inversion against rounding at the binding slice.
    rep.refined_holds = fits(i, half * (1.0 + 1e-12), fit_delta);
  }
  return rep;
}

void AxisMonitor::on_level(const History& h, double) {
  for (next_ = std::max(next_, h.first_index()); next_ < h.count(); ++next_) {
    t.push_back(h.time_of(next_));
    u.push_back(h.at(kU, next_, 0));
    v.push_back(h.at(kV, next_, 0));
    q.push_back(h.at(kQ, next_, 0));
  }
}

SharpDecayReport sharp_decay_check(const std::vector<SliceReport>& reports,
                                   const AxisMonitor& axis, const SharpDecayConfig& cfg) {
  std::vector<double> s, tu, vw;
  for (const SliceReport& r : reports) {
    if (!r.complete) continue;
    s.push_back(r.s);
    tu.push_back(r.sup_t_u);
    vw.push_back(r.sup_vweighted);
  }
  if (s.empty() || s.back() < 15.0)
    throw RangeError("sharp decay: slices must reach s = 15");
  SharpDecayReport rep;
  const bool any_u =
      std::any_of(tu.begin(), tu.end(), [](double x) { return x > 0.0; });
  if (!any_u) {
    rep.tu_degenerate = true;
    rep.tu_bounded = true;
  } else {
    rep.slope_tu = fit_loglog(s, tu, cfg.s_lo, cfg.s_hi).slope;
    rep.tu_bounded = rep.slope_tu <= cfg.bounded_tol;
  }
  if (std::any_of(vw.begin(), vw.end(), [](double x) { return x > 0.0; }))
    rep.slice_exponent = fit_loglog(s, vw, cfg.s_lo, cfg.s_hi).slope;

  std::vector<double> env(axis.t.size());
  for (std::size_t i = 0; i < env.size(); ++i) {
    const double qc = axis.q[i] / cfg.mass;
    env[i] = std::sqrt(axis.v[i] * axis.v[i] + qc * qc);
  }
  if (axis.t.empty() || axis.t.back() < cfg.t_axis_lo)
    throw RangeError("sharp decay: axis record too short");
  rep.axis_exponent = fit_loglog(axis.t, env, cfg.t_axis_lo, kInf).slope;
  rep.axis_ok = std::abs(rep.axis_exponent - cfg.target) <= cfg.tol;
  return rep;
}

bool RecursionReport::holds() const {
  if (!k0_structural || !std::isfinite(C)) return false;
  return std::all_of(checks.begin(), checks.end(), [](const RecursionCheck& c) { return c.holds; });
}

namespace {

// lhs(s) ≤ rhs(C)(s), with rhs nondecreasing in C.
struct Inequality {
  std::string name;
  int k = 0;
  int lower_order_terms = 0;
  std::vector<double> lhs;
  std::function<std::vector<double>(double)> rhs;
};

// Tolerates rounding where both sides agree to the last bits.
bool le(double a, double b) { return a <= b + 1e-12 * std::max(std::abs(a), std::abs(b)); }

bool holds_on(const Inequality& q, double C, std::size_t n) {
  const std::vector<double> r = q.rhs(C);
  for (std::size_t i = 0; i < n; ++i)
    if (!le(q.lhs[i], r[i])) return false;
  return true;
}

double minimal_C(const Inequality& q, std::size_t n) {
  if (holds_on(q, 0.0, n)) return 0.0;
  double hi = 1.0;
  while (!holds_on(q, hi, n)) {
    hi *= 2.0;
    if (hi > 1e12) return kInf;
  }
  double lo = hi / 2.0;
  if (hi == 1.0) lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (holds_on(q, mid, n) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

RecursionReport recursion_certify(const SupQuantities& sup, const EnergyTable& energy,
                                  const RecursionConfig& cfg) {
  const std::vector<double>& s = sup.s;
  if (s.size() < 3) throw RangeError("recursion: need at least three slices for quadrature");
  if (energy.s.size() != s.size()) throw ArgumentError("recursion: tables on different s-grids");
  const int K = sup.n_eff();
  if (energy.n_eff < K) throw ArgumentError("recursion: energy table has too few ranks");
  const std::size_t n = s.size();
  const double eps = cfg.epsilon;
  const double c1e = cfg.C1 * eps;

  std::vector<double> inv_s(n);
  for (std::size_t i = 0; i < n; ++i) inv_s[i] = 1.0 / s[i];
  const auto integral_over_s = [&](const std::vector<double>& g) {
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = g[i] * inv_s[i];
    return cumulative(s, h);
  };
  const auto product = [&](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
    return out;
  };

  // X_k = s^{-1/2}(E_con^{N,k})^{1/2} + (E_c^{N,k})^{1/2}.
  std::vector<std::vector<double>> X(K + 1, std::vector<double>(n));
  for (int k = 0; k <= K; ++k)
    for (std::size_t i = 0; i < n; ++i)
      X[k][i] = std::sqrt(energy.Econ_u[k][i]) / std::sqrt(s[i]) + std::sqrt(energy.Ec_v[k][i]);

  std::vector<Inequality> system;
  for (int k = 0; k <= K; ++k) {
    // A_k ≤ C[ε + ∫λ⁻¹B₀A_{k−1} + Σ_{k₁=1}^{k}∫λ⁻¹B_{k₁}A_{k−k₁}]
    {
      Inequality q{"A_integral", k, 0, sup.A[k], {}};
      std::vector<double> base(n, eps);
      if (k >= 1) {
        const auto t0 = integral_over_s(product(sup.B[0], sup.A[k - 1]));
        ++q.lower_order_terms;
        for (std::size_t i = 0; i < n; ++i) base[i] += t0[i];
        for (int k1 = 1; k1 <= k; ++k1) {
          const auto tk = integral_over_s(product(sup.B[k1], sup.A[k - k1]));
          ++q.lower_order_terms;
          for (std::size_t i = 0; i < n; ++i) base[i] += tk[i];
        }
      }
      q.rhs = [base](double C) {
        std::vector<double> r(base);
        for (double& x : r) x *= C;
        return r;
      };
      system.push_back(std::move(q));
    }
    // B_k ≤ C[ε + Σ_{k₁=0}^{k} A_{k₁}A_{k−k₁}]
    {
      Inequality q{"B_product", k, 0, sup.B[k], {}};
      std::vector<double> base(n, eps);
      for (int k1 = 0; k1 <= k; ++k1) {
        if (k1 < k && k - k1 < k) ++q.lower_order_terms;
        for (std::size_t i = 0; i < n; ++i) base[i] += sup.A[k1][i] * sup.A[k - k1][i];
      }
      q.rhs = [base](double C) {
        std::vector<double> r(base);
        for (double& x : r) x *= C;
        return r;
      };
      system.push_back(std::move(q));
    }
    // Closed system:
    //   A_k ≤ C C₁ε[1 + ∫λ⁻¹B_k + ∫λ⁻¹A_{k−1}] + C Σ_{k₁=1}^{k−1}∫λ⁻¹B_{k₁}A_{k−k₁}
    //   B_k ≤ C C₁ε[1 + A_k] + C Σ_{k₁=1}^{k−1} A_{k₁}A_{k−k₁}
    {
      Inequality qa{"A_closed", k, 0, sup.A[k], {}};
      Inequality qb{"B_closed", k, 0, sup.B[k], {}};
      const auto ib = integral_over_s(sup.B[k]);
      std::vector<double> a_lin(n), a_sum(n, 0.0), b_lin(n), b_sum(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        a_lin[i] = 1.0 + ib[i];
        b_lin[i] = 1.0 + sup.A[k][i];
      }
      if (k >= 1) {
        const auto ia = integral_over_s(sup.A[k - 1]);
        ++qa.lower_order_terms;
        for (std::size_t i = 0; i < n; ++i) a_lin[i] += ia[i];
      }
      for (int k1 = 1; k1 <= k - 1; ++k1) {
        const auto t = integral_over_s(product(sup.B[k1], sup.A[k - k1]));
        ++qa.lower_order_terms;
        ++qb.lower_order_terms;
        for (std::size_t i = 0; i < n; ++i) {
          a_sum[i] += t[i];
          b_sum[i] += sup.A[k1][i] * sup.A[k - k1][i];
        }
      }
      qa.rhs = [a_lin, a_sum, c1e](double C) {
        std::vector<double> r(a_lin.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = C * c1e * a_lin[i] + C * a_sum[i];
        return r;
      };
      qb.rhs = [b_lin, b_sum, c1e](double C) {
        std::vector<double> r(b_lin.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = C * c1e * b_lin[i] + C * b_sum[i];
        return r;
      };
      system.push_back(std::move(qa));
      system.push_back(std::move(qb));
    }
    // Energy recursion:
    //   X_k ≤ 2C₀ε + C(C₁ε)² + C C₁ε∫τ⁻¹X_k + C C₁ε∫τ^{−1+CC₁ε}X_{k−1}
    {
      Inequality q{"energy_integral", k, k >= 1 ? 1 : 0, X[k], {}};
      const auto ix = integral_over_s(X[k]);
      const std::vector<double> prev = k >= 1 ? X[k - 1] : std::vector<double>(n, 0.0);
      const double base = 2.0 * cfg.C0 * eps;
      q.rhs = [=, &s](double C) {
        std::vector<double> g(n, 0.0), r(n);
        // k = 0 has no lower term; skipping it avoids inf·0 once the power overflows.
        if (k >= 1)
          for (std::size_t i = 0; i < n; ++i) g[i] = std::pow(s[i], -1.0 + C * c1e) * prev[i];
        const auto ip = cumulative(s, g);
        for (std::size_t i = 0; i < n; ++i)
          r[i] = base + C * c1e * c1e + C * c1e * ix[i] + C * c1e * ip[i];
        return r;
      };
      system.push_back(std::move(q));
    }
    // Grönwall step of the induction, with the k − 1 bound replaced by the
    // induction hypothesis Y(τ) = 2C₀ε + C(C₁ε)^{3/2}τ^{C√(C₁ε)}:
    //   X_k ≤ (2C₀ε + C(C₁ε)²)(1 + ∫C C₁ε τ⁻¹(s/τ)^{CC₁ε}dτ) + ∫C C₁ε τ^{−1+CC₁ε}Y(τ)dτ
    {
      Inequality q{"gronwall_step", k, k >= 1 ? 1 : 0, X[k], {}};
      const double c0e = cfg.C0 * eps;
      q.rhs = [=, &s](double C) {
        const double a = C * c1e;
        const double b = C * std::sqrt(c1e);
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
          // ∫₂ˢ a τ⁻¹(s/τ)^a dτ = (s/2)^a − 1 in closed form.
          const double growth = a > 0.0 ? std::pow(s[i] / s[0], a) - 1.0 : 0.0;
          r[i] = (2.0 * c0e + C * c1e * c1e) * (1.0 + growth);
        }
        if (k >= 1) {
          std::vector<double> g(n);
          for (std::size_t i = 0; i < n; ++i)
            g[i] = a * std::pow(s[i], -1.0 + a) *
                   (2.0 * c0e + C * std::pow(c1e, 1.5) * std::pow(s[i], b));
          const auto ig = cumulative(s, g);
          for (std::size_t i = 0; i < n; ++i) r[i] += ig[i];
        }
        return r;
      };
      system.push_back(std::move(q));
    }
    // Conclusion: X_k ≤ 2C₀ε + C(C₁ε)^{3/2}s^{C√(C₁ε)}.
    {
      Inequality q{"induction_bound", k, 0, X[k], {}};
      const double c0e = cfg.C0 * eps;
      q.rhs = [=, &s](double C) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i)
          r[i] = 2.0 * c0e + C * std::pow(c1e, 1.5) * std::pow(s[i], C * std::sqrt(c1e));
        return r;
      };
      system.push_back(std::move(q));
    }
  }

  RecursionReport rep;
  rep.C0 = cfg.C0;
  rep.C1 = cfg.C1;
  rep.epsilon = eps;
  rep.s_fit_hi = cfg.s_fit_hi;
  std::size_t n_fit = 0;
  while (n_fit < n && s[n_fit] <= cfg.s_fit_hi) ++n_fit;
  if (n_fit < 2) throw RangeError("recursion: fit window holds fewer than two slices");

  rep.k0_structural = true;
  for (const Inequality& q : system) {
    RecursionCheck c;
    c.name = q.name;
    c.k = q.k;
    c.lower_order_terms = q.lower_order_terms;
    c.C_min = minimal_C(q, n_fit);
    rep.C = std::max(rep.C, c.C_min);
    if (q.k == 0 && q.lower_order_terms != 0) rep.k0_structural = false;
    rep.checks.push_back(c);
  }
  for (std::size_t j = 0; j < system.size(); ++j) {
    RecursionCheck& c = rep.checks[j];
    if (!std::isfinite(rep.C)) break;
    const std::vector<double> r = system[j].rhs(rep.C);
    c.holds = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double lhs = system[j].lhs[i];
      if (r[i] > 0.0) c.worst_ratio = std::max(c.worst_ratio, lhs / r[i]);
      if (!le(lhs, r[i])) c.holds = false;
    }
  }
  return rep;
}

std::string DampingComparison::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << "damped growth " << damped_growth << ", max ratio " << max_ratio;
  if (violated.overflow) os << ", growth to overflow at s = " << violated.overflow_s;
  if (damped.overflow) os << ", damped run overflowed at s = " << damped.overflow_s;
  if (diverged_at) os << ", diverged at s = " << *diverged_at;
  return os.str();
}

namespace {

DampingTrajectory run_trajectory(const CoefficientSet& k, const DampingOptions& opt) {
  DampingTrajectory tr;
  tr.coeffs = k;
  SliceMonitorConfig mc;
  for (double s = kInitialTime; s <= opt.s_max + 1e-9; s += opt.ds) mc.s_values.push_back(s);
  mc.n_eff = -1;
  mc.mass = k.c;
  SliceMonitor mon(opt.grid, mc);
  RunObserver* obs[] = {&mon};
  const double t_final = 0.5 * (opt.s_max * opt.s_max + 1.0) + 0.25;
  if (opt.grid.r_max < t_final + 1.0)
    throw ConfigError("damping comparison: grid too short for the requested s_max");
  Evolver e(opt.grid, k, Mode::coupled, EvolverOptions{opt.cfl});
  FieldState st = make_initial_data(opt.grid, opt.epsilon, opt.profile);
  RunPlan plan{t_final, 5, Retention::ring, 16};
  try {
    e.run(st, plan, obs);
  } catch (const NumericError& err) {
    tr.overflow = true;
    const double t = err.t(), r = std::min(err.r(), err.t());
    tr.overflow_s = std::sqrt(std::max(t * t - r * r, 0.0));
  }
  for (const SliceReport& r : mon.reports()) {
    if (!r.complete) continue;
    tr.s.push_back(r.s);
    tr.Ec_v.push_back(r.Ec_v);
  }
  return tr;
}

}  // namespace

DampingComparison damping_comparison(const CoefficientSet& damped,
                                     const CoefficientSet& violated, const DampingOptions& opt) {
  DampingComparison cmp;
  cmp.damped = run_trajectory(damped, opt);
  cmp.violated = run_trajectory(violated, opt);
  const auto& a = cmp.damped;
  const auto& b = cmp.violated;
  if (!a.Ec_v.empty() && a.Ec_v.front() > 0.0)
    for (double e : a.Ec_v) cmp.damped_growth = std::max(cmp.damped_growth, e / a.Ec_v.front());
  const std::size_t m = std::min(a.s.size(), b.s.size());
  for (std::size_t i = 0; i < m; ++i) {
    if (!(a.Ec_v[i] > 0.0)) continue;
    const double ratio = b.Ec_v[i] / a.Ec_v[i];
    cmp.max_ratio = std::max(cmp.max_ratio, ratio);
    if (!cmp.diverged_at && ratio >= opt.factor)
      cmp.diverged_at = a.s[i];
  }
  if (!cmp.diverged_at && b.overflow && b.overflow_s <= opt.s_max) cmp.diverged_at = b.overflow_s;
  if (a.overflow) cmp.damped_growth = kInf;
  return cmp;
}

}  // namespace wkg
