#include "wkg/ray_ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkg/errors.hpp"
#include "wkg/slice_diag.hpp"

namespace wkg {

double box_identity_residual(const ScalarField& v, const SpacetimePoint& p, double h) {
  if (!inside_cone(p)) throw DomainError("box_identity_residual: point outside the cone");
  const double t = p.t, r = p.r, s = p.s();
  auto f = [&](double tt, double rr) { return v(tt, std::abs(rr)); };

  const double v0 = f(t, r);
  const double vtt = (f(t + h, r) - 2.0 * v0 + f(t - h, r)) / (h * h);
  const double vrr = (f(t, r + h) - 2.0 * v0 + f(t, r - h)) / (h * h);
  const double vr = (f(t, r + h) - f(t, r - h)) / (2.0 * h);
  const double lhs = vtt - vrr - (r > 0.0 ? 2.0 * vr / r : 2.0 * vrr);

  auto W = [&](double lam) {
    const SpacetimePoint q = ray_point(t, r, lam);
    return lam * std::sqrt(lam) * f(q.t, q.r);
  };
  const double Wpp = (W(s + h) - 2.0 * W(s) + W(s - h)) / (h * h);
  auto g = [&](double rho) { return f(std::sqrt(s * s + rho * rho), rho); };
  const double d1 = (g(r + h) - g(r - h)) / (2.0 * h);
  const double d2 = (g(r + h) - 2.0 * g(r) + g(r - h)) / (h * h);
  const double laplace_bar = r > 0.0 ? d2 + 2.0 * d1 / r : 3.0 * d2;
  const double s2 = s * s;
  const double rhs = Wpp / (s * std::sqrt(s)) - (r * r / s2) * d2 - laplace_bar -
                     (3.0 * r / s2) * d1 - 0.75 * v0 / s2;
  return std::abs(lhs - rhs);
}

std::function<double(double)> sampled(double lambda0, double dlambda, std::vector<double> values) {
  if (values.size() < 2 || !(dlambda > 0.0)) throw ArgumentError("sampled: need ≥ 2 samples");
  return [lambda0, dlambda, vals = std::move(values)](double lam) {
    double x = (lam - lambda0) / dlambda;
    const double last = static_cast<double>(vals.size() - 1);
    x = std::clamp(x, 0.0, last);
    const auto i = std::min(static_cast<std::size_t>(x), vals.size() - 2);
    const double a = x - static_cast<double>(i);
    return (1.0 - a) * vals[i] + a * vals[i + 1];
  };
}

double ode_closed_form(double c, double d, double w0, double wp0, double dl) {
  const double omega = 0.5 * std::sqrt(4.0 * c * c - d * d);
  const double A = w0;
  const double B = (wp0 - 0.5 * d * A) / omega;
  return std::exp(0.5 * d * dl) * (A * std::cos(omega * dl) + B * std::sin(omega * dl));
}

namespace {

using cplx = std::complex<double>;

struct Diag {
  cplx pp, pm;    // p±
  cplx dpp, dpm;  // p±′
};

Diag diag_at(const OdeProblem& prob, double lam) {
  const double c2 = prob.c * prob.c;
  const double D = prob.D(lam);
  const double eps = 1e-6 * std::max(1.0, std::abs(lam));
  const double dD = (prob.D(lam + eps) - prob.D(lam - eps)) / (2.0 * eps);
  const cplx root = std::sqrt(cplx(D * D - 4.0 * c2, 0.0));
  Diag g;
  g.pp = 0.5 * (D + root);
  g.pm = 0.5 * (D - root);
  g.dpp = 0.5 * dD * (1.0 + D / root);
  g.dpm = 0.5 * dD * (1.0 - D / root);
  return g;
}

// W̃′ for W̃ = (W̃+, W̃−).
std::array<cplx, 2> diag_rhs(const OdeProblem& prob, double lam, const std::array<cplx, 2>& y) {
  const Diag g = diag_at(prob, lam);
  const cplx inv = 1.0 / (g.pp - g.pm);
  // P′W̃ = ((p+′W̃+ + p−′W̃−), 0)
  const cplx top = g.dpp * y[0] + g.dpm * y[1];
  const double f = prob.f ? prob.f(lam) : 0.0;
  // P⁻¹(x, 0) = inv·(x, −x)
  return {g.pp * y[0] - inv * top + inv * f, g.pm * y[1] + inv * top - inv * f};
}

}  // namespace

OdeSolution ode_integrate(const OdeProblem& prob, double dt) {
  if (!(prob.c > 0.0)) throw ArgumentError("ode_integrate: c must be positive");
  if (!prob.D) throw ArgumentError("ode_integrate: D is required");
  if (!(dt > 0.0) || dt > 1e-2 / prob.c * (1.0 + 1e-12))
    throw ArgumentError("ode_integrate: dt must satisfy 0 < dt ≤ 1e-2/c");
  const double span = prob.lambda1 - prob.lambda0;
  if (!(span > 0.0)) throw ArgumentError("ode_integrate: empty interval");
  const long n = static_cast<long>(std::ceil(span / dt - 1e-9));
  const double h = span / static_cast<double>(n);
  const double c2 = prob.c * prob.c;
  auto f = [&](double lam) { return prob.f ? prob.f(lam) : 0.0; };

  OdeSolution out;
  out.lambda.reserve(n + 1);
  out.w.reserve(n + 1);
  out.wp.reserve(n + 1);

  bool degenerate = false;
  for (long k = 0; k <= n; ++k) {
    const double lam = prob.lambda0 + static_cast<double>(k) * h;
    const double D = prob.D(lam);
    if (std::abs(D) > prob.c) out.hypothesis_violated = true;
    if (std::abs(D * D - 4.0 * c2) < 1e-12 * c2) degenerate = true;
  }

  // Direct route on (w′, w).
  double y1 = prob.wp0, y2 = prob.w0;
  auto rhs = [&](double lam, double a, double b, double& da, double& db) {
    da = prob.D(lam) * a - c2 * b + f(lam);
    db = a;
  };
  out.lambda.push_back(prob.lambda0);
  out.wp.push_back(y1);
  out.w.push_back(y2);
  for (long k = 0; k < n; ++k) {
    const double lam = prob.lambda0 + static_cast<double>(k) * h;
    double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    rhs(lam, y1, y2, k1a, k1b);
    rhs(lam + 0.5 * h, y1 + 0.5 * h * k1a, y2 + 0.5 * h * k1b, k2a, k2b);
    rhs(lam + 0.5 * h, y1 + 0.5 * h * k2a, y2 + 0.5 * h * k2b, k3a, k3b);
    rhs(lam + h, y1 + h * k3a, y2 + h * k3b, k4a, k4b);
    y1 += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    y2 += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    out.lambda.push_back(prob.lambda0 + static_cast<double>(k + 1) * h);
    out.wp.push_back(y1);
    out.w.push_back(y2);
  }

  if (degenerate) return out;
  out.diagonalized = true;
  {
    const Diag g = diag_at(prob, prob.lambda0);
    const cplx inv = 1.0 / (g.pp - g.pm);
    std::array<cplx, 2> y = {inv * (prob.wp0 - g.pm * prob.w0), inv * (-prob.wp0 + g.pp * prob.w0)};
    out.wt_plus.push_back(y[0]);
    out.wt_minus.push_back(y[1]);
    auto axpy = [](const std::array<cplx, 2>& a, double s, const std::array<cplx, 2>& b) {
      return std::array<cplx, 2>{a[0] + s * b[0], a[1] + s * b[1]};
    };
    for (long k = 0; k < n; ++k) {
      const double lam = prob.lambda0 + static_cast<double>(k) * h;
      const auto k1 = diag_rhs(prob, lam, y);
      const auto k2 = diag_rhs(prob, lam + 0.5 * h, axpy(y, 0.5 * h, k1));
      const auto k3 = diag_rhs(prob, lam + 0.5 * h, axpy(y, 0.5 * h, k2));
      const auto k4 = diag_rhs(prob, lam + h, axpy(y, h, k3));
      for (int m = 0; m < 2; ++m) y[m] += h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
      out.wt_plus.push_back(y[0]);
      out.wt_minus.push_back(y[1]);
    }
  }
  for (long k = 0; k <= n; ++k) {
    const Diag g = diag_at(prob, out.lambda[k]);
    const cplx wp = g.pp * out.wt_plus[k] + g.pm * out.wt_minus[k];
    const cplx w = out.wt_plus[k] + out.wt_minus[k];
    out.reassembly_error = std::max(
        {out.reassembly_error, std::abs(wp - out.wp[k]), std::abs(w - out.w[k])});
  }
  return out;
}

BarrierReport barrier_bound_check(const OdeProblem& prob, double dt) {
  if (!prob.S) throw PreconditionError("barrier_bound_check: no barrier S supplied");
  const double span = prob.lambda1 - prob.lambda0;
  const long n = static_cast<long>(std::ceil(span / dt - 1e-9));
  const double h = span / static_cast<double>(n);
  double cs = 0.0, fint = 0.0;
  for (long k = 0; k <= n; ++k) {
    const double lam = prob.lambda0 + static_cast<double>(k) * h;
    const double S = prob.S(lam);
    if (prob.D(lam) + S > 1e-14) {
      std::ostringstream msg;
      msg << "barrier hypothesis D + S <= 0 fails at lambda=" << lam;
      throw PreconditionError(msg.str());
    }
    const double wgt = (k == 0 || k == n) ? 0.5 * h : h;
    cs += wgt * std::abs(S);
    fint += wgt * std::abs(prob.f ? prob.f(lam) : 0.0);
  }
  BarrierReport rep;
  if (prob.C_S) {
    if (cs > *prob.C_S * (1.0 + 1e-9) + 1e-14)
      throw PreconditionError("barrier hypothesis: integral of |S| exceeds C_S");
    rep.C_S = *prob.C_S;
  } else {
    rep.C_S = cs;
  }
  const OdeSolution sol = ode_integrate(prob, dt);
  rep.hypothesis_violated = sol.hypothesis_violated;
  for (std::size_t k = 0; k < sol.w.size(); ++k)
    rep.lhs = std::max(rep.lhs, std::abs(sol.w[k]) + std::abs(sol.wp[k]));
  rep.data = std::abs(prob.w0) + std::abs(prob.wp0) + fint;
  rep.K = rep.data > 0.0 ? rep.lhs / rep.data : 0.0;
  rep.bound = 10.0 * std::exp(0.5 * rep.C_S);
  rep.holds = rep.K <= rep.bound;
  return rep;
}

double RayTrace::max_residual() const {
  double m = 0.0;
  for (double x : residual) m = std::max(m, x);
  return m;
}

RayTrace make_ray(double t, double r, const RaySpec& spec, double step) {
  RayTrace tr;
  tr.t = t;
  tr.r = r;
  tr.s = SpacetimePoint{t, r}.s();
  if (!(tr.s > 0.0)) throw DomainError("make_ray: base point must satisfy t > r");
  tr.lambda0 = ray_lambda0(t, r, spec.s0);
  if (!(tr.s > tr.lambda0)) throw DomainError("make_ray: base slice precedes the ray start");
  const double target = step * tr.s / t;
  const long n = std::max<long>(8, static_cast<long>(std::ceil((tr.s - tr.lambda0) / target)));
  tr.dlambda = (tr.s - tr.lambda0) / static_cast<double>(n);
  tr.lambda.resize(n + 1);
  for (long i = 0; i < n; ++i) tr.lambda[i] = tr.lambda0 + static_cast<double>(i) * tr.dlambda;
  tr.lambda[n] = tr.s;
  return tr;
}

void sample_ray(const History& h, const RaySpec& spec, RayTrace& tr, std::size_t i) {
  if (i != tr.v.size()) throw ArgumentError("sample_ray: samples must be taken in order");
  const double lam = tr.lambda[i];
  const SpacetimePoint q = ray_point(tr.t, tr.r, lam);
  const double tau = q.t, rho = q.r;
  if (tau < h.t_first() - 1e-12 || tau > h.t_last() + 1e-9) {
    std::ostringstream msg;
    msg << "ray from (t=" << tr.t << ", r=" << tr.r << ") leaves the stored history at lambda="
        << lam;
    throw RangeError(msg.str());
  }
  const Jet jv = h.jet(kV, tau, rho, 2, 6);
  const double v = jv(0, 0), vt = jv(1, 0), vr = jv(0, 1);
  const double vtt = jv(2, 0), vtr = jv(1, 1), vrr = jv(0, 2);
  auto value = [&](Channel c) { return h.jet(c, tau, rho, 0, 6)(0, 0); };

  double hv = 0.0, fv = 0.0;
  switch (spec.coupling) {
    case RayCoupling::none:
      break;
    case RayCoupling::u:
      hv = spec.p0 * value(kU);
      break;
    case RayCoupling::u_b:
      hv = spec.p0 * (value(kWB) - spec.kappa * v * v);
      fv = spec.p0 * (value(kUL) + value(kUG)) * vt;
      break;
  }

  const double x = rho / tau;
  const double d1 = x * vt + vr;
  const double d2 = (lam * lam / (tau * tau * tau)) * vt + x * x * vtt + 2.0 * x * vtr + vrr;
  const double laplace_bar = rho > 0.0 ? d2 + 2.0 * d1 / rho : 3.0 * d2;
  const double l2 = lam * lam;
  const double l32 = lam * std::sqrt(lam);
  const double T = (rho * rho / l2) * d2 + laplace_bar + (3.0 * rho / l2) * d1 + 0.75 * v / l2;
  const double Lv = rho * vt + tau * vr;
  const double calL = (tau * vt + rho * vr) / lam;

  tr.v.push_back(v);
  tr.vt.push_back(vt);
  tr.vr.push_back(vr);
  tr.Lv.push_back(Lv);
  tr.w.push_back(l32 * v);
  tr.wp.push_back(1.5 * std::sqrt(lam) * v + l32 * calL);
  tr.D.push_back((tau / lam) * hv);
  tr.R1.push_back(l32 * T);
  tr.R2.push_back(-(1.5 * tau / std::sqrt(lam)) * hv * v - std::sqrt(lam) * (rho / lam) * hv * Lv);
  tr.F.push_back(l32 * fv);
}

void finish_ray(RayTrace& tr, double c) {
  const std::size_t n = tr.w.size();
  tr.residual.assign(n, 0.0);
  tr.defect.assign(n, 0.0);
  if (n < 5) return;
  const double h2 = 12.0 * tr.dlambda * tr.dlambda;
  const auto& w = tr.w;
  for (std::size_t i = 0; i < n; ++i) {
    double wpp;
    if (i >= 2 && i + 2 < n) {
      wpp = (-w[i + 2] + 16.0 * w[i + 1] - 30.0 * w[i] + 16.0 * w[i - 1] - w[i - 2]) / h2;
    } else if (i < 2) {
      wpp = (i == 0) ? (35.0 * w[0] - 104.0 * w[1] + 114.0 * w[2] - 56.0 * w[3] + 11.0 * w[4]) / h2
                     : (11.0 * w[0] - 20.0 * w[1] + 6.0 * w[2] + 4.0 * w[3] - w[4]) / h2;
    } else {
      const std::size_t b = n - 5;
      wpp = (i == n - 1)
                ? (35.0 * w[b + 4] - 104.0 * w[b + 3] + 114.0 * w[b + 2] - 56.0 * w[b + 1] + 11.0 * w[b]) / h2
                : (11.0 * w[b + 4] - 20.0 * w[b + 3] + 6.0 * w[b + 2] + 4.0 * w[b + 1] - w[b]) / h2;
    }
    tr.defect[i] = wpp - tr.D[i] * tr.wp[i] + c * c * w[i] - (tr.R1[i] + tr.R2[i] + tr.F[i]);
    tr.residual[i] = std::abs(tr.defect[i]);
  }
}

RayTrace ray_consistency(const History& h, double t, double r, const RaySpec& spec) {
  const double step = spec.step > 0.0 ? spec.step : std::min(h.dt(), h.grid().dr());
  RayTrace tr = make_ray(t, r, spec, step);
  for (std::size_t i = 0; i < tr.lambda.size(); ++i) sample_ray(h, spec, tr, i);
  finish_ray(tr, spec.c);
  return tr;
}

RayMonitor::RayMonitor(std::vector<std::pair<double, double>> bases, RaySpec spec, double step)
    : spec_(spec) {
  for (const auto& [t, r] : bases) traces_.push_back(make_ray(t, r, spec_, step));
  next_.assign(traces_.size(), 0);
}

void RayMonitor::on_level(const History& h, double t_ready) {
  for (std::size_t k = 0; k < traces_.size(); ++k) {
    RayTrace& tr = traces_[k];
    while (next_[k] < tr.lambda.size() && tr.lambda[next_[k]] * tr.t / tr.s <= t_ready) {
      sample_ray(h, spec_, tr, next_[k]);
      ++next_[k];
    }
  }
}

void RayMonitor::on_finish(const History& h) {
  on_level(h, h.t_last() + 1e-9);
  for (auto& tr : traces_)
    if (tr.complete()) finish_ray(tr, spec_.c);
}

SharpDecay sharp_decay_from_trace(const RayTrace& tr, double eta, double s0, double sup_s0) {
  if (!tr.complete()) throw RangeError("sharp_decay: ray trace is incomplete");
  SharpDecay out;
  const std::size_t n = tr.lambda.size();
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = std::abs(tr.R1[i] + tr.R2[i] + tr.F[i]);
    const double b = std::abs(tr.R1[i + 1] + tr.R2[i + 1] + tr.F[i + 1]);
    integral += 0.5 * (a + b) * (tr.lambda[i + 1] - tr.lambda[i]);
  }
  const double s = tr.s, st = s / tr.t;
  const double v = tr.v.back(), vt = tr.vt.back(), vr = tr.vr.back(), Lv = tr.Lv.back();
  const double dv = std::max(std::abs(vt), std::abs(vr));
  const double v1 = std::max({std::abs(v), dv, std::abs(Lv)});
  const double weight = std::pow(st, eta);
  out.lhs = weight * s * std::sqrt(s) * (std::abs(v) + st * dv);
  out.near_region = tr.r / tr.t <= (s0 * s0 - 1.0) / (s0 * s0 + 1.0);
  out.V = weight * (std::sqrt(s) * v1 + integral);
  if (out.near_region) out.V += weight * sup_s0;
  return out;
}

SharpDecay sharp_decay_estimate(const History& h, double t, double r, double eta,
                                const RaySpec& spec) {
  const RayTrace tr = ray_consistency(h, t, r, spec);
  const SliceData sl = extract_slice(h, spec.s0);
  double sup = 0.0;
  for (int i = 0; i < sl.size(); ++i)
    sup = std::max(sup, std::abs(sl.val[kV][i]) +
                            std::max(std::abs(sl.dt[kV][i]), std::abs(sl.dr_[kV][i])));
  return sharp_decay_from_trace(tr, eta, spec.s0, sup);
}

}  // namespace wkg
