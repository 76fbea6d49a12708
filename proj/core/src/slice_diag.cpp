#include "wkg/slice_diag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wkg/errors.hpp"

namespace wkg {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

double slice_time(double s, double r) { return std::sqrt(s * s + r * r); }

void require_slice_time(const History& h, double s, double r, double t) {
  if (t < h.t_first() - 1e-12 || t > h.t_last() + 1e-9) {
    std::ostringstream msg;
    msg << "slice s=" << s << " leaves the stored history at r=" << r << " (t=" << t
        << ", stored [" << h.t_first() << ", " << h.t_last() << "])";
    throw RangeError(msg.str());
  }
}

constexpr std::array<Channel, 5> kValueChannels = {kU, kV, kUL, kUG, kWB};

void sample_values(const History& h, SliceData& d, int i) {
  const double r = d.r[i], t = d.t[i];
  for (Channel c : kValueChannels) {
    if (d.val[c].empty()) continue;
    const Jet j = h.jet(c, t, r, 1, 4);
    d.val[c][i] = j(0, 0);
    d.dt[c][i] = j(1, 0);
    d.dr_[c][i] = j(0, 1);
  }
}

SliceData make_slice_shell(const History& h, double s, int margin_cells) {
  SliceData d;
  d.s = s;
  d.dr = h.grid().dr();
  const int count = slice_node_count(h.grid(), s, margin_cells);
  d.r.resize(count);
  d.t.resize(count);
  for (int i = 0; i < count; ++i) {
    d.r[i] = i * d.dr;
    d.t[i] = slice_time(s, d.r[i]);
  }
  for (Channel c : kValueChannels) {
    if (!h.has_channel(c)) continue;
    d.val[c].assign(count, 0.0);
    d.dt[c].assign(count, 0.0);
    d.dr_[c].assign(count, 0.0);
  }
  return d;
}

// e_c density in the cross form for value, ∂_t, ∂_r at (t, r).
double density_c(double t, double r, double f, double ft, double fr, double m2) {
  return ft * ft + fr * fr + 2.0 * (r / t) * ft * fr + m2 * f * f;
}

double density_con(double s, double t, double r, double f, double ft, double fr) {
  const double K = ((t * t + r * r) / t) * ft + 2.0 * r * fr;
  const double du = (r / t) * ft + fr;
  const double a = K + 2.0 * f;
  return a * a + s * s * du * du;
}

}  // namespace

int slice_node_count(const RadialGrid& grid, double s, int margin_cells) {
  const double dr = grid.dr();
  const double gap = 1.0 + margin_cells * dr;
  int i = 0;
  for (; i < grid.n; ++i) {
    const double r = i * dr;
    // t − r = s²/(t + r) avoids cancellation for large r.
    if (!(s * s / (slice_time(s, r) + r) > gap)) break;
  }
  return i;
}

double SliceData::weight(int i) const {
  const double w = kFourPi * r[i] * r[i] * dr;
  return (i == 0 || i == size() - 1) ? 0.5 * w : w;
}

SliceData extract_slice(const History& h, double s, int margin_cells) {
  SliceData d = make_slice_shell(h, s, margin_cells);
  if (d.size() > 0) {
    require_slice_time(h, s, d.r.front(), d.t.front());
    require_slice_time(h, s, d.r.back(), d.t.back());
  }
  for (int i = 0; i < d.size(); ++i) sample_values(h, d, i);
  return d;
}

double energy_standard(const SliceData& sl, Channel c, double mass) {
  if (!sl.has(c)) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < sl.size(); ++i)
    acc += sl.weight(i) *
           density_c(sl.t[i], sl.r[i], sl.val[c][i], sl.dt[c][i], sl.dr_[c][i], mass * mass);
  return acc;
}

double energy_standard_underline(const SliceData& sl, Channel c, double mass) {
  if (!sl.has(c)) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < sl.size(); ++i) {
    const double st = sl.s / sl.t[i];
    const double du = sl.d_under(c, i);
    const double f = sl.val[c][i], ft = sl.dt[c][i];
    acc += sl.weight(i) * (st * st * ft * ft + du * du + mass * mass * f * f);
  }
  return acc;
}

double energy_conformal(const SliceData& sl, Channel c) {
  if (!sl.has(c)) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < sl.size(); ++i)
    acc += sl.weight(i) *
           density_con(sl.s, sl.t[i], sl.r[i], sl.val[c][i], sl.dt[c][i], sl.dr_[c][i]);
  return acc;
}

Lemma22 conformal_control(const SliceData& sl, Channel c) {
  Lemma22 out;
  if (!sl.has(c)) return out;
  double a = 0.0, b = 0.0;
  for (int i = 0; i < sl.size(); ++i) {
    const double st = sl.s / sl.t[i];
    const double ft = sl.dt[c][i], fr = sl.dr_[c][i];
    const double w = sl.s * st * st;
    a += sl.weight(i) * w * w * (ft * ft + fr * fr);
    b += sl.weight(i) * st * st * sl.val[c][i] * sl.val[c][i];
  }
  out.lhs = std::sqrt(a) + std::sqrt(b);
  out.rhs = std::sqrt(energy_conformal(sl, c));
  return out;
}

KsRatio make_ks_ratio(double numerator, double denominator) {
  KsRatio k;
  k.numerator = numerator;
  k.denominator = denominator;
  if (denominator > 0.0) {
    k.ratio = numerator / denominator;
  } else if (numerator == 0.0) {
    k.degenerate = true;
  } else {
    k.anomaly = true;
    k.ratio = std::numeric_limits<double>::infinity();
  }
  return k;
}

struct SliceMonitor::Pending {
  SliceData data;
  int next = 0;
  bool done = false;
  // Per word: ∫e_c(Zv), ∫e_con(Zu), ‖Zu‖², ‖Zv‖².
  std::vector<double> ec_v, econ_u, l2_u, l2_v;
  SliceReport rep;
};

SliceMonitor::SliceMonitor(const RadialGrid& grid, SliceMonitorConfig cfg)
    : grid_(grid), cfg_(std::move(cfg)) {
  if (cfg_.n_eff > 3) throw CapabilityError("word diagnostics support orders up to 3");
  if (cfg_.ks_order > 2 || cfg_.ks_order < 0) throw ArgumentError("ks order must be 0..2");
  if (cfg_.n_eff >= 0) words_ = canonical_words(cfg_.n_eff);
  std::sort(cfg_.s_values.begin(), cfg_.s_values.end());
}

SliceMonitor::~SliceMonitor() = default;
SliceMonitor::SliceMonitor(SliceMonitor&&) noexcept = default;

void SliceMonitor::sample(Pending& p, const History& h, int i) {
  SliceData& d = p.data;
  SliceReport& rep = p.rep;
  const double s = d.s, r = d.r[i], t = d.t[i];
  require_slice_time(h, s, r, t);
  sample_values(h, d, i);
  const double st = s / t;
  const double w = d.weight(i);
  auto val = [&](Channel c) { return d.val[c].empty() ? 0.0 : d.val[c][i]; };

  const double u = val(kU), v = val(kV);
  const double dv = d.val[kV].empty() ? 0.0 : std::max(std::abs(d.dt[kV][i]), std::abs(d.dr_[kV][i]));
  rep.sup_t32_u = std::max(rep.sup_t32_u, std::pow(t, 1.5) * std::abs(u));
  rep.sup_t_u = std::max(rep.sup_t_u, t * std::abs(u));
  rep.sup_v_dv = std::max(rep.sup_v_dv, std::abs(v) + dv);
  rep.sup_vweighted = std::max(rep.sup_vweighted, std::pow(st, 2.0 * cfg_.delta - 2.0) * std::abs(v));
  const double uw = std::sqrt(1.0 / st) * s * std::sqrt(s);
  rep.sup_uL = std::max(rep.sup_uL, std::abs(val(kUL)));
  rep.sup_ug = std::max(rep.sup_ug, std::abs(val(kUG)));
  rep.sup_weighted_uL = std::max(rep.sup_weighted_uL, uw * std::abs(val(kUL)));
  rep.sup_weighted_ug = std::max(rep.sup_weighted_ug, uw * std::abs(val(kUG)));
  if (h.has_channel(kWB)) {
    rep.max_wb = (i == 0) ? val(kWB) : std::max(rep.max_wb, val(kWB));
    const double ub = val(kWB) - cfg_.kappa * v * v;
    rep.sup_residual = std::max(rep.sup_residual, std::abs(u - (val(kUL) + val(kUG) + ub)));
  }

  if (words_.empty()) return;
  const int order = cfg_.n_eff + 1;
  const Jet ju = h.jet(kU, t, r, order, 6);
  const Jet jv = h.jet(kV, t, r, order, 6);
  std::array<Jet, 4> Lu, Lv;
  Lu[0] = ju;
  Lv[0] = jv;
  for (int j = 1; j <= cfg_.n_eff; ++j) {
    Lu[j] = boost_jet(Lu[j - 1], t, r);
    Lv[j] = boost_jet(Lv[j - 1], t, r);
  }
  const int K = cfg_.n_eff;
  std::array<double, 4> absv{}, dabsv{}, absu{}, dv_cor{};
  const double m2 = cfg_.mass * cfg_.mass;
  for (std::size_t k = 0; k < words_.size(); ++k) {
    const Word& wd = words_[k];
    const Jet& gu = Lu[wd.j];
    const Jet& gv = Lv[wd.j];
    const double zu = gu(wd.a, wd.b), zut = gu(wd.a + 1, wd.b), zur = gu(wd.a, wd.b + 1);
    const double zv = gv(wd.a, wd.b), zvt = gv(wd.a + 1, wd.b), zvr = gv(wd.a, wd.b + 1);
    p.ec_v[k] += w * density_c(t, r, zv, zvt, zvr, m2);
    p.econ_u[k] += w * density_con(s, t, r, zu, zut, zur);
    if (wd.order() <= cfg_.ks_order) {
      p.l2_u[k] += w * zu * zu;
      p.l2_v[k] += w * zv * zv;
    }
    const double dzv = std::max(std::abs(zvt), std::abs(zvr));
    for (int kk = wd.rank(); kk <= K; ++kk) {
      absv[kk] = std::max(absv[kk], std::abs(zv));
      dabsv[kk] = std::max(dabsv[kk], dzv);
    }
    for (int kk = wd.order(); kk <= K; ++kk) absu[kk] = std::max(absu[kk], std::abs(zu));
    for (int pp = wd.order(); pp <= 1; ++pp) dv_cor[pp] = std::max(dv_cor[pp], dzv);
  }
  const double aw = std::pow(st, 2.0 * cfg_.delta - 2.0) * s * std::sqrt(s);
  for (int kk = 0; kk <= K; ++kk) {
    rep.A_slice[kk] = std::max(rep.A_slice[kk], aw * (absv[kk] + st * dabsv[kk]));
    rep.B_slice[kk] = std::max(rep.B_slice[kk], t * absu[kk]);
  }
  for (int pp = 0; pp < 2; ++pp)
    rep.corollary_lhs[pp] = std::max(rep.corollary_lhs[pp], std::pow(t, 1.5) * st * dv_cor[pp]);
}

void SliceMonitor::finalize(Pending& p) {
  SliceData& d = p.data;
  SliceReport& rep = p.rep;
  rep.complete = true;
  rep.Ec_u = energy_standard(d, kU, 0.0);
  rep.Ec_v = energy_standard(d, kV, cfg_.mass);
  rep.Econ_u = energy_conformal(d, kU);
  rep.Econ_v = energy_conformal(d, kV);
  rep.density_gap = std::abs(rep.Ec_u - energy_standard_underline(d, kU, 0.0)) +
                    std::abs(rep.Ec_v - energy_standard_underline(d, kV, cfg_.mass));
  rep.lemma22_u = conformal_control(d, kU);
  if (!words_.empty()) {
    const int K = cfg_.n_eff;
    rep.Epk_c_v.assign(K + 1, std::vector<double>(K + 1, 0.0));
    rep.Epk_con_u.assign(K + 1, std::vector<double>(K + 1, 0.0));
    for (int pp = 0; pp <= K; ++pp)
      for (int kk = 0; kk <= pp; ++kk)
        for (std::size_t k = 0; k < words_.size(); ++k) {
          if (words_[k].order() > pp || words_[k].rank() > kk) continue;
          rep.Epk_c_v[pp][kk] += p.ec_v[k];
          rep.Epk_con_u[pp][kk] += p.econ_u[k];
        }
    double den_u = 0.0, den_v = 0.0, sup_v = 0.0;
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if (words_[k].order() > cfg_.ks_order) continue;
      den_u += std::sqrt(p.l2_u[k]);
      den_v += std::sqrt(p.l2_v[k]);
    }
    for (int i = 0; i < d.size(); ++i)
      if (d.has(kV)) sup_v = std::max(sup_v, std::pow(d.t[i], 1.5) * std::abs(d.val[kV][i]));
    rep.ks_u = make_ks_ratio(rep.sup_t32_u, den_u);
    rep.ks_v = make_ks_ratio(sup_v, den_v);
  }
  p.done = true;
  if (cfg_.keep_slices) {
    kept_.push_back(std::move(d));
  } else {
    d = SliceData{};
  }
  done_.push_back(rep);
}

void SliceMonitor::on_level(const History& h, double t_ready) {
  if (pending_.empty() && done_.empty()) {
    for (double s : cfg_.s_values) {
      Pending p;
      p.data = make_slice_shell(h, s, cfg_.margin_cells);
      p.rep.s = s;
      p.rep.nodes = p.data.size();
      const std::size_t nw = words_.size();
      p.ec_v.assign(nw, 0.0);
      p.econ_u.assign(nw, 0.0);
      p.l2_u.assign(nw, 0.0);
      p.l2_v.assign(nw, 0.0);
      p.rep.A_slice.assign(std::max(cfg_.n_eff + 1, 0), 0.0);
      p.rep.B_slice.assign(std::max(cfg_.n_eff + 1, 0), 0.0);
      pending_.push_back(std::move(p));
    }
  }
  for (auto& p : pending_) {
    if (p.done) continue;
    while (p.next < p.data.size() && p.data.t[p.next] <= t_ready) {
      sample(p, h, p.next);
      ++p.next;
    }
    if (p.next == p.data.size() && p.data.size() > 0) finalize(p);
  }
}

void SliceMonitor::on_finish(const History& h) { on_level(h, h.t_last() + 1e-9); }

std::vector<SliceReport> SliceMonitor::reports() const {
  std::vector<SliceReport> out = done_;
  std::sort(out.begin(), out.end(),
            [](const SliceReport& a, const SliceReport& b) { return a.s < b.s; });
  return out;
}

std::vector<SliceReport> evaluate_slices(const History& h, const SliceMonitorConfig& cfg) {
  SliceMonitor mon(h.grid(), cfg);
  for (double s : cfg.s_values) {
    const int count = slice_node_count(h.grid(), s, cfg.margin_cells);
    if (count == 0) continue;
    const double r = (count - 1) * h.grid().dr();
    require_slice_time(h, s, 0.0, s);
    require_slice_time(h, s, r, slice_time(s, r));
  }
  mon.on_finish(h);
  return mon.reports();
}

KsRatio ks_ratio(const History& h, double s, Channel field, int p, int margin_cells) {
  if (p < 0 || p > 2) throw ArgumentError("ks_ratio supports p ≤ 2");
  if (field != kU && field != kV) throw ArgumentError("ks_ratio applies to u or v");
  const int count = slice_node_count(h.grid(), s, margin_cells);
  SliceData d = make_slice_shell(h, s, margin_cells);
  const auto words = canonical_words(p);
  std::vector<double> l2(words.size(), 0.0);
  double sup = 0.0;
  for (int i = 0; i < count; ++i) {
    const double r = d.r[i], t = d.t[i];
    require_slice_time(h, s, r, t);
    const Jet j = h.jet(field, t, r, p, 6);
    sup = std::max(sup, std::pow(t, 1.5) * std::abs(j(0, 0)));
    for (std::size_t k = 0; k < words.size(); ++k) {
      const double z = apply_word(j, t, r, words[k])(0, 0);
      l2[k] += d.weight(i) * z * z;
    }
  }
  double den = 0.0;
  for (double x : l2) den += std::sqrt(x);
  return make_ks_ratio(sup, den);
}

}  // namespace wkg
