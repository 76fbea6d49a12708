#pragma once

#include <array>
#include <optional>
#include <vector>

#include "wkg/evolver.hpp"
#include "wkg/history.hpp"
#include "wkg/z_operators.hpp"

namespace wkg {

// Masked nodes 0..M of H_s: r_i < t(r_i) − 1 − margin·dr.
int slice_node_count(const RadialGrid& grid, double s, int margin_cells = 2);

// Fields and first derivatives on H_s at the masked grid nodes.
struct SliceData {
  double s = 0.0;
  double dr = 0.0;
  std::vector<double> r, t;
  // Per value channel; empty when not extracted.
  std::array<std::vector<double>, kChannelCount> val, dt, dr_;

  int size() const { return static_cast<int>(r.size()); }
  bool has(Channel c) const { return !val[c].empty(); }
  double d_under(Channel c, int i) const { return r[i] / t[i] * dt[c][i] + dr_[c][i]; }
  double weight(int i) const;  // trapezoid weight of 4πr²dr
};

// Interpolates every stored value channel onto H_s.
SliceData extract_slice(const History& h, double s, int margin_cells = 2);

// ∫(u_t² + u_r² + 2(r/t)u_t u_r + c²u²).
double energy_standard(const SliceData& sl, Channel c, double mass);
// ∫((s/t)²u_t² + (∂̲_r u)² + c²u²); equal to energy_standard algebraically.
double energy_standard_underline(const SliceData& sl, Channel c, double mass);
// ∫((Ku + 2u)² + (s∂̲_r u)²), Ku = ((t² + r²)/t)u_t + 2r u_r.
double energy_conformal(const SliceData& sl, Channel c);

struct Lemma22 {
  double lhs = 0.0;  // ‖s(s/t)²∂u‖ + ‖(s/t)u‖
  double rhs = 0.0;  // E_con^{1/2}
  double ratio() const { return rhs > 0.0 ? lhs / rhs : 0.0; }
};
Lemma22 conformal_control(const SliceData& sl, Channel c);

struct KsRatio {
  double numerator = 0.0;    // sup t^{3/2}|f|
  double denominator = 0.0;  // Σ ‖Zf‖ over words of order ≤ p
  double ratio = 0.0;
  bool degenerate = false;   // 0/0 reported as 0
  bool anomaly = false;      // nonzero numerator over zero denominator
};
KsRatio make_ks_ratio(double numerator, double denominator);

// Per-slice diagnostics produced by SliceMonitor.
struct SliceReport {
  double s = 0.0;
  int nodes = 0;
  bool complete = false;

  double Ec_u = 0.0;   // mass 0
  double Ec_v = 0.0;   // mass c
  double Econ_u = 0.0;
  double Econ_v = 0.0;
  double density_gap = 0.0;  // |cross form − ∂̲ form| summed over u and v
  Lemma22 lemma22_u;

  // Indexed [p][k], 0 ≤ k ≤ p ≤ n_eff.
  std::vector<std::vector<double>> Epk_c_v, Epk_con_u;
  KsRatio ks_u, ks_v;

  double sup_t32_u = 0.0;
  double sup_t_u = 0.0;
  double sup_v_dv = 0.0;  // sup(|v| + |∂v|)
  double sup_vweighted = 0.0;  // sup (s/t)^{2δ−2}|v|
  // Pointwise corollary: sup t^{3/2}(s/t)|∂v|_{p,p} for p = 0, 1.
  std::array<double, 2> corollary_lhs{};

  // Decomposition channels (zero when absent).
  double sup_uL = 0.0, sup_ug = 0.0;
  double sup_weighted_uL = 0.0, sup_weighted_ug = 0.0;  // (t/s)^{1/2}s^{3/2}|·|
  double max_wb = 0.0;     // signed max of u_b + κv²
  double sup_residual = 0.0;  // |u − (u_L + u_g + u_b)|

  // Slice contributions to the sup quantities, k = 0..n_eff.
  std::vector<double> A_slice, B_slice;
};

struct SliceMonitorConfig {
  std::vector<double> s_values;
  int margin_cells = 2;
  int n_eff = 3;        // highest word order; −1 disables word diagnostics
  int ks_order = 2;
  double mass = 1.0;    // Klein-Gordon c
  double kappa = 0.0;   // B/(2c²) for the decomposition residual
  double delta = 0.05;  // bootstrap δ used in the A_k weight
  bool keep_slices = false;
};

// Accumulates slice diagnostics while a run advances; also usable on a full
// history through evaluate_slices.
class SliceMonitor : public RunObserver {
 public:
  SliceMonitor(const RadialGrid& grid, SliceMonitorConfig cfg);
  ~SliceMonitor() override;
  SliceMonitor(SliceMonitor&&) noexcept;

  void on_level(const History& h, double t_ready) override;
  void on_finish(const History& h) override;

  // Completed slices in increasing s.
  std::vector<SliceReport> reports() const;
  const std::vector<SliceData>& slices() const { return kept_; }
  const SliceMonitorConfig& config() const { return cfg_; }

 private:
  struct Pending;
  void sample(Pending& p, const History& h, int i);
  void finalize(Pending& p);

  RadialGrid grid_;
  SliceMonitorConfig cfg_;
  std::vector<Word> words_;
  std::vector<Pending> pending_;
  std::vector<SliceReport> done_;
  std::vector<SliceData> kept_;
};

// Full-history form; throws RangeError if a slice leaves the stored range.
std::vector<SliceReport> evaluate_slices(const History& h, const SliceMonitorConfig& cfg);

// sup t^{3/2}|f| over Σ_{ord Z ≤ p}‖Zf‖ on H_s from a full history.
KsRatio ks_ratio(const History& h, double s, Channel field, int p = 2, int margin_cells = 2);

}  // namespace wkg
