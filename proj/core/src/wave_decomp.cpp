#include "wkg/wave_decomp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkg/errors.hpp"
#include "wkg/fit.hpp"

namespace wkg {

double decomposition_kappa(const CoefficientSet& k) { return k.B / (2.0 * k.c * k.c); }

namespace {

void require_model_system(const CoefficientSet& k) {
  if (k.extended())
    throw ConfigError("the decomposition is defined only for the model system (h00 = q = 0)");
}

struct Local {
  double t, r, u, v, q, vr;
};

double ub_weight(const CoefficientSet& k, double t, double r) {
  const double x = r / t;
  const double under = k.A00 - 2.0 * x * k.A0r + x * x * k.Arr;
  return under + (k.B / (k.c * k.c)) * (1.0 - x) * (1.0 + x);
}

double full_w_source(const CoefficientSet& k, const Local& p) {
  const double b = k.B / (k.c * k.c);
  return k.A00 * p.q * p.q + 2.0 * k.A0r * p.q * p.vr + k.Arr * p.vr * p.vr +
         b * (p.q * p.q - p.vr * p.vr) + b * k.p0 * p.u * p.v * p.q;
}

double ug_value(const CoefficientSet& k, const Local& p) {
  return full_w_source(k, p) - ub_weight(k, p.t, p.r) * p.q * p.q;
}

double wb_value(const CoefficientSet& k, const Local& p) {
  return ub_weight(k, p.t, p.r) * p.q * p.q;
}

template <class F>
NodeSource stage_source(F f) {
  return [f](const StageView& sv, std::span<double> out) {
    for (int i = 0; i <= sv.m; ++i)
      out[i] = f(Local{sv.t, i * sv.dr, sv.u[i], sv.v[i], sv.q[i], sv.vr[i]});
  };
}

template <class F>
NodeSource history_source(const History& run, F f) {
  return [&run, f](const StageView& sv, std::span<double> out) {
    for (int i = 0; i <= sv.m; ++i) {
      const double r = i * sv.dr;
      const Jet j = run.jet(kV, sv.t, r, 1, 4);
      out[i] = f(Local{sv.t, r, run.interp(kU, sv.t, r), j(0, 0), j(1, 0), j(0, 1)});
    }
  };
}

NodeSource zero_source() {
  return [](const StageView& sv, std::span<double> out) {
    std::fill(out.begin(), out.begin() + sv.m + 1, 0.0);
  };
}

}  // namespace

NodeSource ug_source(const CoefficientSet& k) {
  require_model_system(k);
  return stage_source([k](const Local& p) { return ug_value(k, p); });
}

NodeSource wb_source(const CoefficientSet& k) {
  require_model_system(k);
  return stage_source([k](const Local& p) { return wb_value(k, p); });
}

void set_decomposition_data(FieldState& s, const CoefficientSet& k) {
  const double kap = decomposition_kappa(k);
  const int n = s.size();
  for (Channel c : {kUL, kPL, kUG, kPG, kWB, kPB}) s.ch[c].assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double v = s.has(kV) ? s.v()[i] : 0.0;
    const double q = s.has(kQ) ? s.q()[i] : 0.0;
    s.ch[kUL][i] = s.u()[i] + kap * v * v;
    s.ch[kPL][i] = (s.has(kP) ? s.p()[i] : 0.0) + 2.0 * kap * v * q;
  }
}

void enable_decomposition(Evolver& e, FieldState& s) {
  const CoefficientSet& k = e.coeffs();
  require_model_system(k);
  if (e.mode() != Mode::coupled) throw ConfigError("decomposition requires the coupled mode");
  e.add_aux_wave(kUL, zero_source());
  e.add_aux_wave(kUG, ug_source(k));
  e.add_aux_wave(kWB, wb_source(k));
  set_decomposition_data(s, k);
}

Decomposition decompose(const History& run, const CoefficientSet& k, int stride,
                        EvolverOptions opt) {
  require_model_system(k);
  if (run.first_index() != 0 || run.empty())
    throw RangeError("decompose needs a run stored with full retention");
  const RadialGrid& grid = run.grid();
  FieldState init = run.level(0);
  for (Channel c : {kU, kP, kV, kQ})
    init.ch[c].resize(grid.n, 0.0);
  set_decomposition_data(init, k);

  RunPlan plan;
  plan.t_final = run.t_last();
  plan.stride = stride;

  FieldState dL(init.t, grid.n, 2), dz(init.t, grid.n, 2);
  dL.u() = init.ch[kUL];
  dL.p() = init.ch[kPL];
  History hL = solve_linear_wave(grid, zero_source(), dL, plan, opt);
  History hg = solve_linear_wave(
      grid, history_source(run, [k](const Local& p) { return ug_value(k, p); }), dz, plan, opt);
  History hb = solve_linear_wave(
      grid, history_source(run, [k](const Local& p) { return wb_value(k, p); }), dz, plan, opt);
  if (hL.count() != run.count() || std::abs(hL.dt() - run.dt()) > 1e-12 * run.dt())
    throw ConfigError("decompose: stride does not reproduce the run's level spacing");

  Decomposition dec{decomposition_kappa(k), k, History(grid, run.dt())};
  for (std::size_t lv = 0; lv < run.count(); ++lv) {
    FieldState s = run.level(lv);
    for (Channel c : {kU, kP, kV, kQ}) s.ch[c].resize(grid.n, 0.0);
    auto copy_pair = [&](const History& src, Channel value) {
      const FieldState& a = src.level(lv);
      s.ch[value] = a.u();
      s.ch[rate_of(value)] = a.p();
      s.ch[value].resize(grid.n, 0.0);
      s.ch[rate_of(value)].resize(grid.n, 0.0);
    };
    copy_pair(hL, kUL);
    copy_pair(hg, kUG);
    copy_pair(hb, kWB);
    dec.combined.append(s);
  }
  return dec;
}

void DecompositionMonitor::on_level(const History& h, double) {
  const double dr = h.grid().dr();
  for (; next_ < h.count(); ++next_) {
    if (next_ < h.first_index()) continue;
    const double t = h.time_of(next_);
    ++rep_.levels;
    for (int i = 0; i < h.grid().n; ++i) {
      const double r = i * dr;
      if (!(r < t - 1.0 - margin_ * dr)) break;
      const double wb = h.at(kWB, next_, i);
      const double v = h.at(kV, next_, i);
      if (!any_ || wb > rep_.max_wb) {
        rep_.max_wb = wb;
        rep_.t_at = t;
        rep_.r_at = r;
        any_ = true;
      }
      rep_.scale = std::max(rep_.scale, std::abs(wb));
      const double ub = wb - kappa_ * v * v;
      const double res =
          h.at(kU, next_, i) - (h.at(kUL, next_, i) + h.at(kUG, next_, i) + ub);
      rep_.max_residual = std::max(rep_.max_residual, std::abs(res));
    }
  }
}

void DecompositionMonitor::on_finish(const History& h) { on_level(h, h.t_last()); }

SignReport DecompositionMonitor::report(double dr) const {
  SignReport r = rep_;
  r.tol = 10.0 * dr * dr * r.scale;
  return r;
}

void require_damping(const CoefficientSet& k, double t_min, double t_max) {
  const DampingSweep sw = damping_sweep(k, std::max(t_min, 1.0 + 1e-9), std::max(t_max, t_min + 1.0));
  if (sw.max_margin > 1e-14) {
    std::ostringstream msg;
    msg << "damping condition fails (margin " << sw.max_margin << " at t=" << sw.argmax.t
        << ", r=" << sw.argmax.r << "); the sign certificate does not apply";
    throw PreconditionError(msg.str());
  }
}

SignReport sign_certificate(const Decomposition& dec) {
  require_damping(dec.coeffs, dec.combined.t_first(), dec.combined.t_last());
  DecompositionMonitor mon(dec.kappa);
  mon.on_finish(dec.combined);
  return mon.report(dec.combined.grid().dr());
}

DecayFit decay_rates(const std::vector<SliceReport>& reports, double s_lo) {
  std::vector<double> s, a, b;
  for (const auto& r : reports) {
    if (!r.complete || r.s < s_lo) continue;
    s.push_back(r.s);
    a.push_back(r.sup_weighted_uL);
    b.push_back(r.sup_weighted_ug);
  }
  if (s.size() < 3) throw RangeError("decay_rates: too few slices in the fit window");
  DecayFit out;
  auto fit = [&](const std::vector<double>& y, double& slope, bool& degenerate) {
    int positive = 0;
    for (double x : y) positive += x > 0.0;
    if (positive < 3) {
      degenerate = true;
      return;
    }
    slope = fit_loglog(s, y, s_lo, 1e300).slope;
  };
  fit(a, out.slope_uL, out.degenerate_uL);
  fit(b, out.slope_ug, out.degenerate_ug);
  return out;
}

double cone_cutoff(double x) {
  auto psi = [](double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; };
  if (x <= 1.0) return 0.0;
  if (x >= 2.0) return 1.0;
  const double a = psi(x - 1.0);
  return a / (a + psi(2.0 - x));
}

double probe_source(double mu, double nu, double C_f, double t, double r) {
  const double d = t - r;
  if (d <= 1.0) return 0.0;
  return C_f * std::pow(t, -2.0 - nu) * std::pow(d, -1.0 + mu) * cone_cutoff(d);
}

namespace {

class ProbeMonitor : public RunObserver {
 public:
  ProbeMonitor(double mu, double nu) : mu_(mu), nu_(nu) {}
  void on_level(const History& h, double) override {
    const std::size_t k = h.count() - 1;
    const double t = h.t_last();
    const double dr = h.grid().dr();
    double sup = 0.0;
    for (int i = 0; i < h.grid().n; ++i) {
      const double r = i * dr;
      const double d = t - r;
      if (!(d > 1.0 + 2.0 * dr)) break;
      const double u = std::abs(h.at(kU, k, i));
      const double w = nu_ > 0.0 ? t * std::pow(d, nu_ - mu_) : std::pow(t, 1.0 + nu_) * std::pow(d, -mu_);
      sup = std::max(sup, u * w);
    }
    t_.push_back(t);
    sup_.push_back(sup);
  }
  void on_finish(const History&) override {}
  std::vector<double> t_, sup_;

 private:
  double mu_, nu_;
};

}  // namespace

ProbeResult linear_decay_probe(double mu, double nu, double C_f, const ProbeOptions& opt) {
  if (!(mu > 0.0 && mu <= 0.5) || !(nu != 0.0 && std::abs(nu) <= 0.5))
    throw ArgumentError("linear_decay_probe: need 0 < mu <= 1/2 and 0 < |nu| <= 1/2");
  ProbeResult res;
  res.mu = mu;
  res.nu = nu;
  res.C_f = C_f;
  FieldState data(2.0, opt.grid.n, 2);
  RunPlan plan;
  plan.t_final = opt.t_final;
  plan.stride = opt.stride;
  plan.retention = Retention::ring;
  EvolverOptions eo;
  eo.cfl = opt.cfl;
  ProbeMonitor mon(mu, nu);
  RunObserver* obs[] = {&mon};
  solve_linear_wave(opt.grid,
                    from_point_source([=](double t, double r) { return probe_source(mu, nu, C_f, t, r); }),
                    data, plan, eo, obs);
  res.t = mon.t_;
  res.weighted_sup = mon.sup_;
  for (double x : res.weighted_sup) res.measured_sup = std::max(res.measured_sup, x);
  if (res.measured_sup > 0.0) res.slope = fit_loglog(res.t, res.weighted_sup, opt.t_fit_lo, 1e300).slope;
  return res;
}

}  // namespace wkg
