#include "wkg/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "wkg/errors.hpp"

namespace wkg {

Mode mode_from_name(std::string_view name) {
  if (name == "coupled") return Mode::coupled;
  if (name == "wave-only" || name == "wave_only") return Mode::wave_only;
  if (name == "kg-only" || name == "kg_only") return Mode::kg_only;
  if (name == "linear-with-source" || name == "linear_with_source")
    return Mode::linear_with_source;
  throw ConfigError("unknown evolution mode '" + std::string(name) + "'");
}

NodeSource from_point_source(PointSource f) {
  return [f = std::move(f)](const StageView& sv, std::span<double> out) {
    for (int i = 0; i <= sv.m; ++i) out[i] = f(sv.t, i * sv.dr);
  };
}

NodeSource from_history(const History& h, Channel c) {
  return [&h, c](const StageView& sv, std::span<double> out) {
    for (int i = 0; i <= sv.m; ++i) out[i] = h.interp(c, sv.t, i * sv.dr);
  };
}

Evolver::Evolver(RadialGrid grid, CoefficientSet coeffs, Mode mode, EvolverOptions opt)
    : grid_(grid), coeffs_(coeffs), mode_(mode), opt_(opt) {
  coeffs_.validate();
  if (!(opt_.cfl > 0.0) || opt_.cfl > 0.8)
    throw ConfigError("CFL number must lie in (0, 0.8]");
  const int n = grid_.n;
  lap_plus_.assign(n, 0.0);
  lap_minus_.assign(n, 0.0);
  for (int i = 1; i < n; ++i) {
    lap_plus_[i] = 1.0 + 1.0 / i;
    lap_minus_[i] = 1.0 - 1.0 / i;
  }
  zeros_.assign(n, 0.0);
  vr_.assign(n, 0.0);
  src_.assign(n, 0.0);
}

void Evolver::set_source(NodeSource f) { source_ = std::move(f); }

void Evolver::add_aux_wave(Channel value, NodeSource f) {
  if (!is_value_channel(value) || value < kUL)
    throw ArgumentError("auxiliary waves must use one of the auxiliary value channels");
  aux_.push_back({value, std::move(f)});
}

std::vector<Channel> Evolver::evolved() const {
  std::vector<Channel> out;
  if (mode_ != Mode::kg_only) out.insert(out.end(), {kU, kP});
  if (mode_ == Mode::coupled || mode_ == Mode::kg_only) out.insert(out.end(), {kV, kQ});
  for (const auto& a : aux_) out.insert(out.end(), {a.value, rate_of(a.value)});
  return out;
}

int Evolver::active_last(double t) const {
  const int last = grid_.n - 1;
  if (!opt_.active_region) return last;
  const double edge = (t - 1.0 + opt_.front_pad) / grid_.dr();
  if (edge >= last) return last;
  return std::clamp(static_cast<int>(std::ceil(edge)) + 2, 1, last);
}

void Evolver::eval(double t, const std::array<const double*, kChannelCount>& cur,
                   std::array<double*, kChannelCount>& k, int m) const {
  const int n = grid_.n;
  const double dr = grid_.dr();
  const double inv_dr2 = 1.0 / (dr * dr);
  const int interior = std::min(m, n - 2);
  auto lap = [&](const double* f, int i) {
    if (i == 0) return 6.0 * (f[1] - f[0]) * inv_dr2;
    return (lap_plus_[i] * f[i + 1] - 2.0 * f[i] + lap_minus_[i] * f[i - 1]) * inv_dr2;
  };

  const double* u = cur[kU];
  const double* p = cur[kP];
  const double* v = cur[kV];
  const double* q = cur[kQ];
  const bool need_vr = mode_ == Mode::coupled || mode_ == Mode::wave_only || !aux_.empty();
  if (need_vr) {
    vr_[0] = 0.0;
    const double inv_2dr = 0.5 / dr;
    for (int i = 1; i <= interior; ++i) vr_[i] = (v[i + 1] - v[i - 1]) * inv_2dr;
    if (m == n - 1) vr_[m] = 0.0;
  }
  const StageView view{t, dr, m, u, p, v, q, vr_.data()};

  if (mode_ != Mode::kg_only) {
    double* ku = k[kU];
    double* kp = k[kP];
    if (mode_ == Mode::linear_with_source) {
      if (source_) {
        source_(view, std::span<double>(src_.data(), m + 1));
      } else {
        std::fill(src_.begin(), src_.begin() + m + 1, 0.0);
      }
      for (int i = 0; i <= interior; ++i) {
        ku[i] = p[i];
        kp[i] = lap(u, i) + src_[i];
      }
    } else {
      const double A00 = coeffs_.A00, A0r2 = 2.0 * coeffs_.A0r, Arr = coeffs_.Arr,
                   B = coeffs_.B;
      for (int i = 0; i <= interior; ++i) {
        const double qi = q[i], vri = vr_[i], vi = v[i];
        ku[i] = p[i];
        kp[i] = lap(u, i) + A00 * qi * qi + A0r2 * qi * vri + Arr * vri * vri + B * vi * vi;
      }
    }
  }

  if (mode_ == Mode::coupled || mode_ == Mode::kg_only) {
    double* kv = k[kV];
    double* kq = k[kQ];
    const double c2 = coeffs_.c * coeffs_.c, p0 = coeffs_.p0;
    if (!coeffs_.extended()) {
      for (int i = 0; i <= interior; ++i) {
        kv[i] = q[i];
        kq[i] = lap(v, i) - c2 * v[i] + p0 * u[i] * q[i];
      }
    } else {
      const double h00 = coeffs_.h00, qc = coeffs_.q;
      for (int i = 0; i <= interior; ++i) {
        const double hu = h00 * u[i];
        if (std::abs(hu) > 0.5) {
          std::ostringstream msg;
          msg << "principal coefficient 1 - h00*u degenerate (h00*u = " << hu << ")";
          throw NumericError(msg.str(), t, i * dr);
        }
        kv[i] = q[i];
        kq[i] = (lap(v, i) - c2 * v[i] + p0 * u[i] * q[i] + qc * u[i] * v[i]) / (1.0 - hu);
      }
    }
  }

  for (const auto& a : aux_) {
    a.source(view, std::span<double>(src_.data(), m + 1));
    const double* f = cur[a.value];
    const double* ft = cur[rate_of(a.value)];
    double* kf = k[a.value];
    double* kft = k[rate_of(a.value)];
    for (int i = 0; i <= interior; ++i) {
      kf[i] = ft[i];
      kft[i] = lap(f, i) + src_[i];
    }
  }

  if (m == n - 1) {
    for (int c = 0; c < kChannelCount; ++c)
      if (k[c] != nullptr) k[c][n - 1] = 0.0;
  }
}

void Evolver::rhs(const FieldState& s, FieldState& ds, int m) const {
  const int n = grid_.n;
  if (s.size() != n) throw ArgumentError("field state size does not match grid");
  check_finite(s, m);
  std::array<const double*, kChannelCount> cur{};
  std::array<double*, kChannelCount> k{};
  for (int c = 0; c < kChannelCount; ++c)
    cur[c] = s.has(static_cast<Channel>(c)) ? s.ch[c].data() : zeros_.data();
  for (Channel c : evolved()) {
    ds.ch[c].assign(n, 0.0);
    k[c] = ds.ch[c].data();
  }
  ds.t = s.t;
  eval(s.t, cur, k, m);
}

void Evolver::check_finite(const FieldState& s, int m) const {
  for (int c = 0; c < kChannelCount; ++c) {
    const auto& a = s.ch[c];
    const int len = std::min<int>(m + 1, static_cast<int>(a.size()));
    for (int i = 0; i < len; ++i) {
      if (!std::isfinite(a[i]) || std::abs(a[i]) > 1e150) {
        std::ostringstream msg;
        msg << "non-finite value in channel " << channel_name(static_cast<Channel>(c))
            << " at t=" << s.t << ", r=" << grid_.r(i);
        throw NumericError(msg.str(), s.t, grid_.r(i));
      }
    }
  }
}

void Evolver::step(FieldState& s, double dt) {
  const int n = grid_.n;
  if (s.size() != n) throw ArgumentError("field state size does not match grid");
  if (!(dt > 0.0) || dt > opt_.cfl * grid_.dr() * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "time step " << dt << " violates dt <= cfl*dr = " << opt_.cfl * grid_.dr();
    throw ConfigError(msg.str());
  }
  const auto chans = evolved();
  for (Channel c : chans) {
    if (!s.has(c)) s.ch[c].assign(n, 0.0);
    if (stage_[c].size() != static_cast<std::size_t>(n)) {
      stage_[c].assign(n, 0.0);
      k_[c].assign(n, 0.0);
      acc_[c].assign(n, 0.0);
    }
  }
  const int m = active_last(s.t + dt);
  const int len = m + 1;
  if (last_m_ < m) last_m_ = m;  // stage entries beyond m must be cleared up to here

  std::array<const double*, kChannelCount> cur{};
  std::array<double*, kChannelCount> k{};
  for (int c = 0; c < kChannelCount; ++c)
    cur[c] = s.has(static_cast<Channel>(c)) ? s.ch[c].data() : zeros_.data();
  for (Channel c : chans) k[c] = k_[c].data();

  auto set_stage = [&](double a) {
    for (Channel c : chans) {
      const double* y = s.ch[c].data();
      const double* kc = k_[c].data();
      double* st = stage_[c].data();
      for (int i = 0; i < len; ++i) st[i] = y[i] + a * kc[i];
      for (int i = len; i <= last_m_; ++i) st[i] = 0.0;
      if (m == n - 1) st[n - 1] = 0.0;
      cur[c] = st;
    }
  };
  auto accumulate = [&](double a, bool first) {
    for (Channel c : chans) {
      const double* kc = k_[c].data();
      double* ac = acc_[c].data();
      if (first) {
        const double* y = s.ch[c].data();
        for (int i = 0; i < len; ++i) ac[i] = y[i] + a * kc[i];
      } else {
        for (int i = 0; i < len; ++i) ac[i] += a * kc[i];
      }
    }
  };

  const double t = s.t;
  eval(t, cur, k, m);
  accumulate(dt / 6.0, true);
  set_stage(0.5 * dt);
  eval(t + 0.5 * dt, cur, k, m);
  accumulate(dt / 3.0, false);
  set_stage(0.5 * dt);
  eval(t + 0.5 * dt, cur, k, m);
  accumulate(dt / 3.0, false);
  set_stage(dt);
  eval(t + dt, cur, k, m);
  accumulate(dt / 6.0, false);
  last_m_ = m;
  for (Channel c : chans) {
    std::copy(acc_[c].begin(), acc_[c].begin() + len, s.ch[c].begin());
    if (m == n - 1) s.ch[c][n - 1] = 0.0;
  }
  s.t = t + dt;
}

History Evolver::run(FieldState& s, const RunPlan& plan, std::span<RunObserver* const> observers) {
  if (plan.stride < 1) throw ConfigError("history stride must be at least 1");
  const double t0 = s.t;
  const double span = plan.t_final - t0;
  if (span < 0.0) throw ConfigError("t_final precedes the initial time");
  const double dt_max = opt_.cfl * grid_.dr();
  long steps = static_cast<long>(std::ceil(span / dt_max - 1e-9));
  steps = ((steps + plan.stride - 1) / plan.stride) * plan.stride;
  const double dt = steps > 0 ? span / static_cast<double>(steps) : dt_max;

  for (Channel c : evolved())
    if (!s.has(c)) s.ch[c].assign(grid_.n, 0.0);
  for (auto& st : stage_) std::fill(st.begin(), st.end(), 0.0);
  last_m_ = -1;

  History h(grid_, dt * plan.stride, plan.retention, plan.ring_capacity);
  check_finite(s, active_last(t0));
  h.append(s, active_last(t0) + 1);
  for (long k = 1; k <= steps; ++k) {
    step(s, dt);
    s.t = t0 + static_cast<double>(k) * dt;
    if (k % plan.stride == 0) {
      const int m = active_last(s.t);
      check_finite(s, m);
      h.append(s, m + 1);
      // Wide time stencils need a few stored levels before anything is ready.
      const bool warm = h.count() - h.first_index() >= 8;
      const double ready = warm ? h.t_last() - 3.0 * h.dt() : t0 - 1.0;
      for (RunObserver* o : observers) o->on_level(h, ready);
    }
  }
  for (RunObserver* o : observers) o->on_finish(h);
  return h;
}

FieldState rhs(const FieldState& s, const RadialGrid& grid, const CoefficientSet& coeffs,
               Mode mode) {
  EvolverOptions opt;
  opt.active_region = false;
  Evolver e(grid, coeffs, mode, opt);
  FieldState ds;
  e.rhs(s, ds, grid.n - 1);
  return ds;
}

FieldState step_rk4(const FieldState& s, double dt, const RadialGrid& grid,
                    const CoefficientSet& coeffs, Mode mode, double cfl) {
  EvolverOptions opt;
  opt.cfl = cfl;
  opt.active_region = false;
  Evolver e(grid, coeffs, mode, opt);
  FieldState out = s;
  e.step(out, dt);
  return out;
}

History solve_linear_wave(const RadialGrid& grid, NodeSource source, const FieldState& data,
                          const RunPlan& plan, EvolverOptions opt,
                          std::span<RunObserver* const> observers) {
  Evolver e(grid, CoefficientSet{}, Mode::linear_with_source, opt);
  e.set_source(std::move(source));
  FieldState s(data.t, grid.n, 2);
  if (data.has(kU)) s.u() = data.u();
  if (data.has(kP)) s.p() = data.p();
  return e.run(s, plan, observers);
}

}  // namespace wkg
