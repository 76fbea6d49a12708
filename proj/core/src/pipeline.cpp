#include "wkg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "wkg/errors.hpp"
#include "wkg/fit.hpp"
#include "wkg/frame_geometry.hpp"
#include "wkg/initial_data.hpp"

namespace wkg {

using nlohmann::json;

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::skipped: return "skipped";
  }
  return "skipped";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Verdict verdict(bool ok) { return ok ? Verdict::pass : Verdict::fail; }

// json cannot hold inf or NaN; they are written as null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

RadialGrid grid_for(double t_final, double dr) {
  const double r_max = t_final + 3.0;
  return RadialGrid(r_max, static_cast<int>(std::lround(r_max / dr)) + 1);
}

CheckResult make_check(std::string name, std::string statement) {
  CheckResult c;
  c.name = std::move(name);
  c.statement = std::move(statement);
  return c;
}

RaySpec ray_spec_for(const RunConfig& cfg) {
  RaySpec spec;
  spec.s0 = cfg.ray_s0;
  spec.c = cfg.coeffs.c;
  spec.p0 = cfg.coeffs.p0;
  const bool couples = cfg.mode == Mode::coupled && cfg.coeffs.p0 != 0.0;
  spec.coupling = couples ? RayCoupling::u : RayCoupling::none;
  return spec;
}

}  // namespace

MainRun evolve_monitored(const RunConfig& cfg, const MonitorPlan& plan) {
  MainRun out;
  out.dr = cfg.grid.dr();
  const bool decomp = plan.decomposition;
  out.kappa = decomp ? decomposition_kappa(cfg.coeffs) : 0.0;

  Evolver e(cfg.grid, cfg.coeffs, cfg.mode, EvolverOptions{cfg.cfl});
  FieldState st = make_initial_data(cfg.grid, cfg.epsilon, cfg.profile);
  if (decomp) enable_decomposition(e, st);

  SliceMonitorConfig mc;
  mc.s_values = cfg.s_values();
  mc.n_eff = plan.n_eff;
  mc.mass = cfg.coeffs.c;
  mc.kappa = out.kappa;
  mc.delta = cfg.bootstrap.delta;
  SliceMonitor slices(cfg.grid, mc);

  SliceMonitorConfig pc;
  for (double s : mc.s_values)
    if (std::abs(s / 2.0 - std::round(s / 2.0)) < 1e-9) pc.s_values.push_back(s);
  pc.n_eff = -1;
  pc.mass = cfg.coeffs.c;
  pc.keep_slices = true;
  SliceMonitor profiles(cfg.grid, pc);

  DecompositionMonitor dmon(out.kappa);
  std::optional<RayMonitor> rays;
  if (!plan.ray_bases.empty()) rays.emplace(plan.ray_bases, plan.ray_spec, plan.ray_step);

  std::vector<RunObserver*> obs = {&slices, &out.axis};
  if (plan.profiles) obs.push_back(&profiles);
  if (decomp) obs.push_back(&dmon);
  if (rays) obs.push_back(&*rays);

  RunPlan rp{cfg.t_final, cfg.stride, plan.retention, 16};
  std::uint64_t h = 1469598103934665603ull;
  try {
    History hist = e.run(st, rp, obs);
    out.dt = hist.dt();
  } catch (const NumericError& err) {
    out.blew_up = true;
    out.blowup_t = err.t();
    out.blowup_r = err.r();
    out.blowup_what = err.what();
  }
  for (int c = 0; c < kChannelCount; ++c)
    if (st.has(static_cast<Channel>(c)))
      h = fnv1a(h, st.ch[c].data(), st.ch[c].size() * sizeof(double));
  out.slices = slices.reports();
  for (const SliceReport& r : out.slices) {
    h = fnv1a(h, &r.Ec_u, sizeof(double));
    h = fnv1a(h, &r.Ec_v, sizeof(double));
    h = fnv1a(h, &r.Econ_u, sizeof(double));
  }
  out.digest = h;
  if (plan.profiles) out.profiles = profiles.slices();
  if (decomp) out.sign = dmon.report(out.dr);
  if (rays) out.rays = rays->traces();
  return out;
}

std::vector<std::pair<double, double>> ray_bases(int count, double s_hi, double t_hi) {
  std::vector<std::pair<double, double>> out;
  const double s_lo = std::min(6.0, s_hi);
  for (int i = 0; i < count; ++i) {
    const int a = i % 4, b = (i / 4) % 5, c = i / 20;
    const double s = s_lo + (s_hi - s_lo) * (a + 0.37 * c) / (3.0 + 0.37 * c);
    const double y = 0.6 * b / 4.0;
    double t = s / std::sqrt(1.0 - y * y);
    if (t > t_hi) t = t_hi;
    const double r = std::sqrt(std::max(t * t - s * s, 0.0));
    out.emplace_back(t, r);
  }
  return out;
}

CheckResult check_frame(std::uint64_t seed, int points) {
  CheckResult c = make_check("frame", "semi-hyperboloidal frame transitions are mutually inverse");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ut(2.0, 200.0), u01(0.0, 1.0);
  std::normal_distribution<double> gauss;
  double worst = 0.0, worst_contract = 0.0;
  const CoefficientSet mink{1.0, 0.0, -1.0, 0.0};
  for (int k = 0; k < points; ++k) {
    const double t = ut(rng);
    const double r = u01(rng) * (t - 1.0) * (1.0 - 1e-9);
    Vec3 n{gauss(rng), gauss(rng), gauss(rng)};
    const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    for (double& x : n) x /= len;
    const SpacetimePoint p{t, r};
    const Mat4 m = matmul(transition_phi(p, n), transition_psi(p, n));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(m[i][j] - (i == j ? 1.0 : 0.0)));
    const double st = p.s() / t;
    worst_contract = std::max(worst_contract, std::abs(underline_contract(mink, p) - st * st));
  }
  c.metrics = {{"max_identity_error", worst}, {"max_contract_error", worst_contract}, {"points", points}};
  c.tolerances = {{"identity", 1e-13}, {"contract", 1e-13}};
  c.verdict = verdict(worst <= 1e-13 && worst_contract <= 1e-13);
  return c;
}

CheckResult check_box_identity(double h) {
  CheckResult c = make_check("box_identity", "wave operator equals its hyperboloidal ray form");
  const std::vector<std::pair<const char*, ScalarField>> fields = {
      {"cos(t)sin(r)/r",
       [](double t, double r) { return std::cos(t) * (r > 1e-12 ? std::sin(r) / r : 1.0 - r * r / 6.0); }},
      {"exp(-(t-5)^2-r^2)", [](double t, double r) { return std::exp(-(t - 5.0) * (t - 5.0) - r * r); }},
      {"cos(2t)exp(-r^2/4)", [](double t, double r) { return std::cos(2.0 * t) * std::exp(-0.25 * r * r); }},
      {"exp(-t/10)cos(r)", [](double t, double r) { return std::exp(-0.1 * t) * std::cos(r); }},
      {"1/(1+t^2+r^2)", [](double t, double r) { return 1.0 / (1.0 + t * t + r * r); }},
  };
  const SpacetimePoint pts[] = {{7.0, 2.5}, {9.0, 4.0}, {5.5, 0.0}, {4.0, 1.5}};
  bool ok = true;
  json per = json::array();
  for (const auto& [name, f] : fields) {
    double a = 0.0, b = 0.0;
    for (const SpacetimePoint& p : pts) {
      a = std::max(a, box_identity_residual(f, p, h));
      b = std::max(b, box_identity_residual(f, p, 0.5 * h));
    }
    const double order = (a > 0.0 && b > 0.0) ? std::log2(a / b) : 0.0;
    ok = ok && std::abs(order - 2.0) <= 0.2;
    per.push_back({{"field", name}, {"residual_h", a}, {"residual_h2", b}, {"order", order}});
  }
  c.metrics = {{"h", h}, {"fields", per}};
  c.tolerances = {{"order", 2.0}, {"order_tol", 0.2}};
  c.verdict = verdict(ok);
  return c;
}

CheckResult check_ode(std::uint64_t seed, int problems) {
  CheckResult c = make_check("ode", "ray ODE integrator and barrier bound");
  const double dt = 1e-3;
  double closed_err = 0.0, reassembly = 0.0;
  const double cases[][4] = {{1.0, 0.0, 1.0, 0.0},  {1.0, -0.5, 1.0, 0.5}, {2.0, 0.3, -0.5, 1.0},
                             {1.5, -1.0, 0.2, -2.0}, {0.7, 0.2, 1.0, 1.0}};
  for (const auto& cs : cases) {
    OdeProblem p;
    p.c = cs[0];
    p.lambda0 = 2.0;
    p.lambda1 = 12.0;
    const double d = cs[1];
    p.D = [d](double) { return d; };
    p.f = [](double) { return 0.0; };
    p.w0 = cs[2];
    p.wp0 = cs[3];
    const OdeSolution sol = ode_integrate(p, dt);
    for (std::size_t i = 0; i < sol.lambda.size(); ++i) {
      const double ref = ode_closed_form(p.c, d, p.w0, p.wp0, sol.lambda[i] - p.lambda0);
      closed_err = std::max(closed_err, std::abs(sol.w[i] - ref));
    }
    reassembly = std::max(reassembly, sol.reassembly_error);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_ratio = 0.0;
  int violated = 0;
  for (int k = 0; k < problems; ++k) {
    OdeProblem p;
    p.c = 0.5 + 1.5 * U(rng);
    p.lambda0 = 2.0;
    p.lambda1 = 2.0 + 5.0 + 10.0 * U(rng);
    const double a0 = -0.3 * p.c * U(rng);
    const double a1 = 0.4 * p.c * U(rng), w1 = 0.2 + 2.0 * U(rng), ph1 = 6.28 * U(rng);
    const double a2 = 0.2 * p.c * U(rng), w2 = 0.2 + 2.0 * U(rng), ph2 = 6.28 * U(rng);
    p.D = [=](double l) { return a0 + a1 * std::sin(w1 * l + ph1) + a2 * std::cos(w2 * l + ph2); };
    p.S = [D = p.D](double l) { return -std::max(D(l), 0.0); };
    const double b = 2.0 * U(rng) - 1.0, wf = 3.0 * U(rng);
    p.f = [=](double l) { return b * std::sin(wf * l) * std::exp(-0.2 * (l - 2.0)); };
    p.w0 = 2.0 * U(rng) - 1.0;
    p.wp0 = 2.0 * U(rng) - 1.0;
    const BarrierReport br = barrier_bound_check(p, dt);
    if (!br.holds) ++violated;
    worst_ratio = std::max(worst_ratio, br.K / br.bound);
  }
  c.metrics = {{"closed_form_error", closed_err},
               {"reassembly_error", reassembly},
               {"barrier_problems", problems},
               {"barrier_violations", violated},
               {"max_K_over_bound", worst_ratio}};
  c.tolerances = {{"closed_form", 1e-8}, {"dt", dt}};
  c.verdict = verdict(closed_err <= 1e-8 && violated == 0);
  return c;
}

Drift energy_drift(const std::vector<SliceReport>& slices, double s_lo, double s_hi) {
  std::vector<double> eu, ev;
  for (const SliceReport& r : slices) {
    if (!r.complete || r.s < s_lo - 1e-9 || r.s > s_hi + 1e-9) continue;
    eu.push_back(r.Ec_u);
    ev.push_back(r.Ec_v);
  }
  if (eu.size() < 2) throw RangeError("energy drift: fewer than two slices in the window");
  Drift d;
  d.u = eu.front() > 0.0 ? relative_drift(eu, eu.front()) : 0.0;
  d.v = ev.front() > 0.0 ? relative_drift(ev, ev.front()) : 0.0;
  return d;
}

CheckResult check_conservation(const std::vector<SliceReport>& slices, double tol) {
  CheckResult c = make_check("conservation", "hyperboloidal energy of free fields is conserved");
  const Drift d = energy_drift(slices);
  c.metrics = {{"drift_u", d.u}, {"drift_v", d.v}, {"s_lo", 3.0}, {"s_hi", 20.0}};
  c.tolerances = {{"relative_drift", tol}};
  c.verdict = verdict(d.max() < tol);
  return c;
}

CheckResult check_ks(const std::vector<SliceReport>& slices, double tol) {
  CheckResult c = make_check("ks", "Klainerman-Sobolev ratio stays bounded on hyperboloids");
  std::vector<double> ru, rv;
  bool anomaly = false;
  for (const SliceReport& r : slices) {
    if (!r.complete || r.s < 4.0 - 1e-9 || r.s > 20.0 + 1e-9) continue;
    anomaly = anomaly || r.ks_u.anomaly || r.ks_v.anomaly;
    if (!r.ks_u.degenerate) ru.push_back(r.ks_u.ratio);
    if (!r.ks_v.degenerate) rv.push_back(r.ks_v.ratio);
  }
  if (ru.empty() && rv.empty()) throw RangeError("ks: no slices carry word norms in [4, 20]");
  const double vu = relative_variation(ru), vv = relative_variation(rv);
  c.metrics = {{"variation_u", vu}, {"variation_v", vv}, {"anomaly", anomaly}};
  if (!ru.empty()) {
    c.metrics["ratio_u_min"] = *std::min_element(ru.begin(), ru.end());
    c.metrics["ratio_u_max"] = *std::max_element(ru.begin(), ru.end());
  }
  if (!rv.empty()) {
    c.metrics["ratio_v_min"] = *std::min_element(rv.begin(), rv.end());
    c.metrics["ratio_v_max"] = *std::max_element(rv.begin(), rv.end());
  }
  c.tolerances = {{"variation", tol}};
  c.verdict = verdict(!anomaly && vu < tol && vv < tol);
  return c;
}

CheckResult check_kg_decay(const AxisMonitor& axis, double mass, double tol) {
  CheckResult c = make_check("kg_decay", "Klein-Gordon field decays like t^(-3/2) at the centre");
  std::vector<double> env(axis.t.size());
  for (std::size_t i = 0; i < env.size(); ++i) {
    const double qc = axis.q[i] / mass;
    env[i] = std::sqrt(axis.v[i] * axis.v[i] + qc * qc);
  }
  const LineFit f = fit_loglog(axis.t, env, 10.0, kInf);
  c.metrics = {{"exponent", f.slope}, {"points", f.points}, {"t_lo", 10.0}};
  c.tolerances = {{"target", -1.5}, {"tol", tol}};
  c.verdict = verdict(std::abs(f.slope + 1.5) <= tol);
  return c;
}

CheckResult check_sharp_decay(const std::vector<SliceReport>& slices, const AxisMonitor& axis,
                              double mass) {
  CheckResult c = make_check("sharp_decay", "sharp pointwise decay t^-1 for u and s^(-3/2) for v");
  SharpDecayConfig sc;
  sc.mass = mass;
  const SharpDecayReport r = sharp_decay_check(slices, axis, sc);
  c.metrics = {{"slope_t_u", r.slope_tu},
               {"t_u_identically_zero", r.tu_degenerate},
               {"axis_exponent", r.axis_exponent},
               {"slice_weighted_exponent", r.slice_exponent}};
  c.tolerances = {{"bounded_slope", sc.bounded_tol}, {"target", sc.target}, {"tol", sc.tol}};
  c.verdict = verdict(r.holds());
  return c;
}

CheckResult check_bootstrap(const std::vector<SliceReport>& slices, const BootstrapConfig& cfg,
                            BootstrapReport* out) {
  CheckResult c = make_check("bootstrap", "bootstrap energy bounds and their refined halves");
  const BootstrapReport r = bootstrap_check(energy_table(slices, cfg.n_eff), cfg);
  c.metrics = {{"C0", r.C0},           {"C1", r.C1},
               {"fit_C1", r.fit_C1},   {"fit_delta", num(r.fit_delta)},
               {"delta", r.delta},     {"refined_holds", r.refined_holds},
               {"n_eff", cfg.n_eff}};
  if (r.first_failure_s) c.metrics["first_failure_s"] = *r.first_failure_s;
  c.tolerances = {{"delta_max", 0.1}, {"s_lo", cfg.s_lo}, {"s_hi", cfg.s_hi}};
  c.verdict = verdict(r.holds(0.1));
  if (out) *out = r;
  return c;
}

CheckResult check_recursion(const std::vector<SliceReport>& slices, const BootstrapConfig& cfg,
                            RecursionReport* out) {
  CheckResult c = make_check("recursion", "integral inequality system and its induction on the rank");
  const EnergyTable et = energy_table(slices, cfg.n_eff);
  const BootstrapReport br = bootstrap_check(et, cfg);
  RecursionConfig rc;
  rc.epsilon = cfg.epsilon;
  rc.C0 = br.C0;
  rc.C1 = br.C1;
  const RecursionReport r = recursion_certify(compute_sup_quantities(slices, cfg.n_eff), et, rc);
  json per = json::array();
  for (const RecursionCheck& k : r.checks)
    per.push_back({{"name", k.name},
                   {"k", k.k},
                   {"lower_order_terms", k.lower_order_terms},
                   {"C_min", num(k.C_min)},
                   {"worst_ratio", k.worst_ratio},
                   {"holds", k.holds}});
  c.metrics = {{"C", num(r.C)}, {"C0", r.C0}, {"C1", r.C1}, {"k0_structural", r.k0_structural},
               {"inequalities", per}};
  c.tolerances = {{"s_fit_hi", rc.s_fit_hi}, {"k_max", cfg.n_eff}};
  c.verdict = verdict(r.holds());
  if (out) *out = r;
  return c;
}

RayConvergence ray_convergence(const RunConfig& cfg, int count, double t_max) {
  if (cfg.coeffs.extended())
    throw PreconditionError("rays: the ray identity covers the p0·u·∂t v coupling only");
  RayConvergence rc;
  const double t_end = std::min(t_max, cfg.t_final);
  const double s_hi = std::min(12.0, 0.8 * (t_end - 0.5));
  const auto bases = ray_bases(count, s_hi, t_end - 0.5);
  const double dr = cfg.grid.dr();
  const double step = std::min(dr, cfg.cfl * dr);
  RunConfig c = cfg;
  c.t_final = t_end;
  c.s_min = 2.0;
  c.s_max = 2.0;
  MonitorPlan plan;
  plan.ray_bases = bases;
  plan.ray_spec = ray_spec_for(cfg);
  plan.ray_step = step;
  c.grid = grid_for(t_end, dr);
  rc.coarse = evolve_monitored(c, plan).rays;
  c.grid = grid_for(t_end, 0.5 * dr);
  rc.fine = evolve_monitored(c, plan).rays;
  const double c2 = cfg.coeffs.c * cfg.coeffs.c;
  for (std::size_t i = 0; i < rc.coarse.size(); ++i) {
    const RayTrace& a = rc.coarse[i];
    const RayTrace& b = rc.fine[i];
    if (!a.complete() || !b.complete() || a.w.size() != b.w.size())
      throw RangeError("rays: incomplete traces");
    // The identity's own discretisation error, estimated by how much its
    // defect moves under dr → dr/2 on the same λ samples.
    double e = 0.0, dw = 0.0;
    for (std::size_t j = 0; j < a.w.size(); ++j) {
      e = std::max(e, std::abs(a.defect[j] - b.defect[j]));
      dw = std::max(dw, c2 * std::abs(a.w[j] - b.w[j]));
    }
    rc.residual.push_back(a.max_residual());
    rc.self_error.push_back(e);
    rc.w_change.push_back(dw);
  }
  return rc;
}

CheckResult check_rays(const RayConvergence& rc, double factor) {
  CheckResult c = make_check("rays", "ray ODE identity holds to discretisation accuracy");
  double worst = 0.0;
  int failed = 0;
  for (std::size_t i = 0; i < rc.residual.size(); ++i) {
    const double ratio = rc.self_error[i] > 0.0 ? rc.residual[i] / rc.self_error[i]
                                                : (rc.residual[i] > 0.0 ? kInf : 0.0);
    worst = std::max(worst, ratio);
    if (!(rc.residual[i] <= factor * rc.self_error[i])) ++failed;
  }
  c.metrics = {{"rays", rc.residual.size()}, {"failed", failed}, {"max_ratio", num(worst)}};
  if (!rc.residual.empty()) {
    c.metrics["max_residual"] = *std::max_element(rc.residual.begin(), rc.residual.end());
    c.metrics["max_self_error"] = *std::max_element(rc.self_error.begin(), rc.self_error.end());
    c.metrics["max_w_change"] = *std::max_element(rc.w_change.begin(), rc.w_change.end());
    c.metrics["ratios"] = json::array();
    for (std::size_t i = 0; i < rc.residual.size(); ++i)
      c.metrics["ratios"].push_back(num(rc.residual[i] / rc.self_error[i]));
  }
  c.tolerances = {{"factor", factor}};
  c.verdict = verdict(failed == 0 && !rc.residual.empty());
  return c;
}

DecompositionConvergence decomposition_convergence(const RunConfig& cfg, double t_max) {
  DecompositionConvergence dc;
  const double t_end = std::min(t_max, cfg.t_final);
  RunConfig c = cfg;
  c.t_final = t_end;
  c.s_min = 2.0;
  c.s_max = 2.0;
  MonitorPlan plan;
  plan.decomposition = true;
  for (double dr : {2.0 * cfg.grid.dr(), cfg.grid.dr()}) {
    c.grid = grid_for(t_end, dr);
    const MainRun run = evolve_monitored(c, plan);
    dc.dr.push_back(dr);
    dc.residual.push_back(run.sign->max_residual);
  }
  const double a = dc.residual[0], b = dc.residual[1];
  dc.order = (a > 0.0 && b > 0.0) ? std::log2(a / b) : (a == 0.0 && b == 0.0 ? kInf : 0.0);
  return dc;
}

CheckResult check_decomposition(const MainRun& run, const DecompositionConvergence& conv,
                                double min_order) {
  CheckResult c = make_check("decomposition", "u splits into linear, good and sign-definite parts");
  if (!run.sign) throw PreconditionError("decomposition: the run did not co-evolve the split");
  const SignReport& s = *run.sign;
  const DecayFit df = decay_rates(run.slices);
  const bool both_zero = conv.residual.size() == 2 && conv.residual[0] == 0.0 &&
                         conv.residual[1] == 0.0;
  c.metrics = {{"max_wb", s.max_wb},
               {"max_wb_at", {s.t_at, s.r_at}},
               {"sup_wb", s.scale},
               {"tol_sign", s.tol},
               {"recombination_residual", s.max_residual},
               {"convergence_dr", conv.dr},
               {"convergence_residual", conv.residual},
               {"convergence_order", num(conv.order)},
               {"slope_uL", df.slope_uL},
               {"slope_ug", df.slope_ug}};
  c.tolerances = {{"min_order", min_order}, {"tol_sign", "10 dr^2 sup|u_b + kappa v^2|"}};
  c.verdict = verdict(s.holds() && (both_zero || conv.order >= min_order));
  return c;
}

CheckResult check_probe(const RunConfig& cfg, double t_final) {
  CheckResult c = make_check("probe", "weighted sup of the source-driven linear wave stays bounded");
  ProbeOptions po;
  po.t_final = t_final;
  po.grid = grid_for(t_final, cfg.grid.dr());
  po.cfl = cfg.cfl;
  po.stride = cfg.stride;
  bool ok = true;
  json per = json::array();
  for (const auto& [mu, nu] : {std::pair{0.25, 0.25}, std::pair{0.25, -0.25}}) {
    const ProbeResult r = linear_decay_probe(mu, nu, 1.0, po);
    ok = ok && r.bounded(0.1);
    per.push_back({{"mu", mu}, {"nu", nu}, {"slope", r.slope}, {"sup", r.measured_sup}});
  }
  c.metrics = {{"t_final", t_final}, {"cases", per}};
  c.tolerances = {{"slope_max", 0.1}};
  c.verdict = verdict(ok);
  return c;
}

CheckResult check_damping(const RunConfig& cfg, DampingComparison* out) {
  CheckResult c = make_check("damping", "damped and anti-damped couplings separate");
  CoefficientSet bad = cfg.violated ? *cfg.violated : cfg.coeffs;
  if (!cfg.violated) bad.B = -cfg.coeffs.B;
  DampingOptions o;
  o.epsilon = cfg.epsilon;
  o.profile = cfg.profile;
  o.s_max = cfg.covered_s_max();
  o.cfl = cfg.cfl;
  o.grid = grid_for(0.5 * (o.s_max * o.s_max + 1.0) + 0.25, cfg.grid.dr());
  const DampingComparison d = damping_comparison(cfg.coeffs, bad, o);
  c.metrics = {{"damped_growth", num(d.damped_growth)},
               {"max_ratio", num(d.max_ratio)},
               {"violated_overflow", d.violated.overflow},
               {"epsilon", o.epsilon},
               {"s_max", o.s_max}};
  if (d.violated.overflow) c.metrics["overflow_s"] = d.violated.overflow_s;
  if (d.diverged_at) c.metrics["diverged_at"] = *d.diverged_at;
  c.detail = d.summary();
  c.tolerances = {{"factor", 2.0}};
  c.verdict = verdict(d.holds(2.0));
  if (out) *out = d;
  return c;
}

CheckResult check_determinism(const RunConfig& cfg, double t_max) {
  CheckResult c = make_check("determinism", "repeated single-thread runs are bit-identical");
  RunConfig r = cfg;
  r.t_final = std::min(t_max, cfg.t_final);
  r.grid = grid_for(r.t_final, cfg.grid.dr());
  const MonitorPlan plan;
  const std::uint64_t a = evolve_monitored(r, plan).digest;
  const std::uint64_t b = evolve_monitored(r, plan).digest;
  std::ostringstream hex;
  hex << std::hex << a;
  c.metrics = {{"digest", hex.str()}, {"identical", a == b}, {"t_final", r.t_final}};
  c.verdict = verdict(a == b);
  return c;
}

namespace {

CheckResult failed(const std::string& name, Verdict v, std::string detail) {
  CheckResult c = make_check(name, "");
  c.verdict = v;
  c.detail = std::move(detail);
  return c;
}

template <class F>
void guarded(std::vector<CheckResult>& out, const std::string& name, bool& blew_up, F&& f) {
  try {
    out.push_back(f());
  } catch (const NumericError& e) {
    blew_up = true;
    out.push_back(failed(name, Verdict::fail, std::string("blow-up: ") + e.what()));
  } catch (const PreconditionError& e) {
    out.push_back(failed(name, Verdict::skipped, e.what()));
  } catch (const std::exception& e) {
    out.push_back(failed(name, Verdict::fail, e.what()));
  }
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
  PipelineResult res;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    res.error = e.what();
    res.exit_code = 2;
    return res;
  }
  const auto wants = [&](const char* n) { return cfg.wants(n); };
  const bool words = wants("ks") || wants("bootstrap") || wants("recursion");
  const bool need_main = words || wants("conservation") || wants("kg_decay") ||
                         wants("sharp_decay") || wants("decomposition");
  bool blew_up = false;
  auto& out = res.checks;

  MainRun main;
  if (need_main) {
    MonitorPlan plan;
    if (words) plan.n_eff = std::max(cfg.bootstrap.n_eff, wants("ks") ? 2 : 0);
    plan.decomposition = wants("decomposition") && cfg.mode == Mode::coupled &&
                         !cfg.coeffs.extended();
    plan.profiles = !cfg.output.empty();
    main = evolve_monitored(cfg, plan);
    if (main.blew_up) {
      blew_up = true;
      std::ostringstream m;
      m << main.blowup_what << " (t=" << main.blowup_t << ", r=" << main.blowup_r << ")";
      res.error = m.str();
    }
  }
  const double mass = cfg.coeffs.c;
  if (wants("frame")) guarded(out, "frame", blew_up, [&] { return check_frame(cfg.seed); });
  if (wants("box_identity"))
    guarded(out, "box_identity", blew_up, [&] { return check_box_identity(); });
  if (wants("ode")) guarded(out, "ode", blew_up, [&] { return check_ode(cfg.seed); });
  if (need_main && !main.blew_up) {
    if (wants("conservation"))
      guarded(out, "conservation", blew_up, [&] { return check_conservation(main.slices); });
    if (wants("ks")) guarded(out, "ks", blew_up, [&] { return check_ks(main.slices); });
    if (wants("kg_decay"))
      guarded(out, "kg_decay", blew_up, [&] { return check_kg_decay(main.axis, mass); });
    if (wants("sharp_decay"))
      guarded(out, "sharp_decay", blew_up,
              [&] { return check_sharp_decay(main.slices, main.axis, mass); });
    if (wants("decomposition"))
      guarded(out, "decomposition", blew_up, [&] {
        return check_decomposition(main, decomposition_convergence(cfg));
      });
    if (wants("bootstrap"))
      guarded(out, "bootstrap", blew_up,
              [&] { return check_bootstrap(main.slices, cfg.bootstrap); });
    if (wants("recursion"))
      guarded(out, "recursion", blew_up,
              [&] { return check_recursion(main.slices, cfg.bootstrap); });
  }
  RayConvergence rays;
  if (wants("rays"))
    guarded(out, "rays", blew_up, [&] {
      rays = ray_convergence(cfg, cfg.rays);
      return check_rays(rays);
    });
  if (wants("probe")) guarded(out, "probe", blew_up, [&] { return check_probe(cfg); });
  if (wants("damping")) guarded(out, "damping", blew_up, [&] { return check_damping(cfg); });
  if (wants("determinism"))
    guarded(out, "determinism", blew_up, [&] { return check_determinism(cfg); });

  if (!cfg.output.empty()) {
    std::filesystem::create_directories(cfg.output);
    if (need_main) {
      write_energies_csv(cfg.output / "energies.csv", main.slices);
      write_profiles(cfg.output / "slices", main.profiles);
      if (main.sign) write_decomposition_csv(cfg.output / "decomposition.csv", main.slices);
    }
    if (!rays.coarse.empty()) write_rays(cfg.output / "rays", rays.coarse);
    write_certification(cfg.output / "certification.json", cfg, out);
  }

  if (blew_up) {
    res.exit_code = 3;
  } else if (std::any_of(out.begin(), out.end(),
                         [](const CheckResult& c) { return c.verdict == Verdict::fail; })) {
    res.exit_code = 1;
  }
  return res;
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const json& grid) {
  const auto axis = [&](const char* key, double fallback) {
    if (!grid.contains(key)) return std::vector<double>{fallback};
    try {
      return grid.at(key).get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("sweep: ") + key + " must be a list of numbers");
    }
  };
  for (const auto& [key, _] : grid.items())
    if (key != "epsilon" && key != "B" && key != "c" && key != "dr")
      throw ConfigError("sweep: unknown parameter '" + key + "'");
  const auto eps = axis("epsilon", base.epsilon), Bs = axis("B", base.coeffs.B),
             cs = axis("c", base.coeffs.c), drs = axis("dr", base.grid.dr());
  std::vector<SweepRow> rows;
  if (grid.empty()) return rows;
  for (double e : eps)
    for (double b : Bs)
      for (double c : cs)
        for (double d : drs) {
          SweepRow row;
          row.epsilon = e;
          row.B = b;
          row.c = c;
          row.dr = d;
          rows.push_back(row);
        }

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i; (i = next++) < rows.size();) {
      SweepRow& row = rows[i];
      try {
        RunConfig cfg = base;
        cfg.epsilon = row.epsilon;
        cfg.bootstrap.epsilon = row.epsilon;
        cfg.coeffs.B = row.B;
        cfg.coeffs.c = row.c;
        cfg.grid = RadialGrid(base.grid.r_max,
                              static_cast<int>(std::lround(base.grid.r_max / row.dr)) + 1);
        if (!base.output.empty()) cfg.output = base.output / ("run_" + std::to_string(i));
        const PipelineResult r = run_pipeline(cfg);
        row.exit_code = r.exit_code;
        row.error = r.error;
        row.checks = r.checks;
      } catch (const ConfigError& e) {
        row.exit_code = 2;
        row.error = e.what();
      } catch (const std::exception& e) {
        row.exit_code = 1;
        row.error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(base.threads, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  if (!base.output.empty()) {
    std::filesystem::create_directories(base.output);
    std::ofstream os(base.output / "sweep.csv");
    os << std::setprecision(17);
    os << "epsilon,B,c,dr,exit_code,check,verdict,fit_C1,fit_delta,axis_exponent,error\n";
    for (const SweepRow& r : rows) {
      const auto metric = [](const CheckResult& c, const char* key) {
        return c.metrics.contains(key) && c.metrics[key].is_number() ? c.metrics[key].dump() : "";
      };
      if (r.checks.empty())
        os << r.epsilon << ',' << r.B << ',' << r.c << ',' << r.dr << ',' << r.exit_code
           << ",,,,,,\"" << r.error << "\"\n";
      for (const CheckResult& c : r.checks) {
        os << r.epsilon << ',' << r.B << ',' << r.c << ',' << r.dr << ',' << r.exit_code << ','
           << c.name << ',' << verdict_name(c.verdict) << ',' << metric(c, "fit_C1") << ','
           << metric(c, "fit_delta") << ',' << metric(c, "exponent") << ",\"" << r.error << "\"\n";
      }
    }
  }
  return rows;
}

void write_energies_csv(const std::filesystem::path& path, const std::vector<SliceReport>& slices) {
  std::ofstream os(path);
  os << std::setprecision(17);
  int K = 0;
  for (const SliceReport& r : slices) K = std::max<int>(K, r.A_slice.size());
  os << "s,nodes,Ec_u,Ec_v,Econ_u,Econ_v,sup_t_u,sup_t32_u,ks_u,ks_v";
  for (int k = 0; k < K; ++k) os << ",A" << k;
  for (int k = 0; k < K; ++k) os << ",B" << k;
  // E^{p,k}: words of order ≤ p and rank ≤ k.
  for (int p = 0; p < K; ++p)
    for (int k = 0; k <= p; ++k) os << ",Ec_v_p" << p << "k" << k << ",Econ_u_p" << p << "k" << k;
  os << '\n';
  for (const SliceReport& r : slices) {
    if (!r.complete) continue;
    os << r.s << ',' << r.nodes << ',' << r.Ec_u << ',' << r.Ec_v << ',' << r.Econ_u << ','
       << r.Econ_v << ',' << r.sup_t_u << ',' << r.sup_t32_u << ',' << r.ks_u.ratio << ','
       << r.ks_v.ratio;
    for (int k = 0; k < K; ++k) os << ',' << (k < static_cast<int>(r.A_slice.size()) ? r.A_slice[k] : 0.0);
    for (int k = 0; k < K; ++k) os << ',' << (k < static_cast<int>(r.B_slice.size()) ? r.B_slice[k] : 0.0);
    for (int p = 0; p < K; ++p)
      for (int k = 0; k <= p; ++k) {
        const bool has = p < static_cast<int>(r.Epk_c_v.size());
        os << ',' << (has ? r.Epk_c_v[p][k] : 0.0) << ',' << (has ? r.Epk_con_u[p][k] : 0.0);
      }
    os << '\n';
  }
}

void write_decomposition_csv(const std::filesystem::path& path,
                             const std::vector<SliceReport>& slices) {
  std::ofstream os(path);
  os << std::setprecision(17);
  os << "s,sup_uL,sup_ug,sup_weighted_uL,sup_weighted_ug,max_wb,sup_residual\n";
  for (const SliceReport& r : slices) {
    if (!r.complete) continue;
    os << r.s << ',' << r.sup_uL << ',' << r.sup_ug << ',' << r.sup_weighted_uL << ','
       << r.sup_weighted_ug << ',' << r.max_wb << ',' << r.sup_residual << '\n';
  }
}

void write_profiles(const std::filesystem::path& dir, const std::vector<SliceData>& profiles,
                    int thin) {
  std::filesystem::create_directories(dir);
  for (const SliceData& d : profiles) {
    std::ostringstream name;
    name << "s_" << std::setw(5) << std::setfill('0') << std::lround(d.s * 100) << ".csv";
    std::ofstream os(dir / name.str());
    os << std::setprecision(17);
    os << "r,t,u,ut,ur,v,vt,vr\n";
    for (int i = 0; i < d.size(); i += thin) {
      os << d.r[i] << ',' << d.t[i];
      for (Channel c : {kU, kV}) {
        if (d.has(c))
          os << ',' << d.val[c][i] << ',' << d.dt[c][i] << ',' << d.dr_[c][i];
        else
          os << ",0,0,0";
      }
      os << '\n';
    }
  }
}

void write_rays(const std::filesystem::path& dir, const std::vector<RayTrace>& rays) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < rays.size(); ++k) {
    const RayTrace& tr = rays[k];
    std::ofstream os(dir / ("ray_" + std::to_string(k) + ".csv"));
    os << std::setprecision(17);
    os << "# base t=" << tr.t << " r=" << tr.r << " s=" << tr.s << '\n';
    os << "lambda,w,wp,D,R1,R2,F,residual\n";
    for (std::size_t i = 0; i < tr.lambda.size(); ++i) {
      const auto at = [&](const std::vector<double>& x) { return i < x.size() ? x[i] : 0.0; };
      os << tr.lambda[i] << ',' << at(tr.w) << ',' << at(tr.wp) << ',' << at(tr.D) << ','
         << at(tr.R1) << ',' << at(tr.R2) << ',' << at(tr.F) << ',' << at(tr.residual) << '\n';
    }
  }
}

json to_json(const CheckResult& c) {
  json j = {{"name", c.name},
            {"statement", c.statement},
            {"verdict", verdict_name(c.verdict)},
            {"metrics", c.metrics},
            {"tolerances", c.tolerances}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

void write_certification(const std::filesystem::path& path, const RunConfig& cfg,
                         const std::vector<CheckResult>& checks) {
  json j;
  j["header"] = {
      {"n_eff", cfg.bootstrap.n_eff},
      {"n_eff_note",
       "operator orders are capped at 3; the recursion is generic in the rank k, so k <= 3 "
       "exercises the same inductive structure as higher orders"},
      {"config", to_json(cfg)}};
  j["checks"] = json::array();
  for (const CheckResult& c : checks) j["checks"].push_back(to_json(c));
  std::ofstream os(path);
  os << j.dump(2) << '\n';
}

}  // namespace wkg
