#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wkg/evolver.hpp"
#include "wkg/frame_geometry.hpp"
#include "wkg/history.hpp"
#include "wkg/initial_data.hpp"
#include "wkg/slice_diag.hpp"

namespace wkg {

struct BootstrapConfig {
  int n_eff = 3;         // highest operator order, ≤ 3
  double delta = 0.05;   // in (0, 1/10)
  double epsilon = 0.01;
  std::optional<double> C0, C1;  // fitted when absent
  double s_lo = 4.0, s_hi = 20.0;  // verdict window
  void validate() const;  // ConfigError
};

// Running sups over K_[2,s], indexed [k][i] on the s-grid.
struct SupQuantities {
  std::vector<double> s;
  std::vector<std::vector<double>> A, B;
  int n_eff() const { return static_cast<int>(A.size()) - 1; }
};

SupQuantities compute_sup_quantities(const std::vector<SliceReport>& reports, int n_eff);
// Evaluates slices from a stored run first; CapabilityError beyond order 3.
SupQuantities compute_sup_quantities(const History& h, const SliceMonitorConfig& cfg);

// E_con^{N,k}(u) and E_c^{N,k}(v) with N = n_eff, indexed [k][i].
struct EnergyTable {
  int n_eff = 0;
  std::vector<double> s;
  std::vector<std::vector<double>> Econ_u, Ec_v;
  // E^N = Σ_k E^{N,k}.
  double total_con(std::size_t i) const;
  double total_c(std::size_t i) const;
};

EnergyTable energy_table(const std::vector<SliceReport>& reports, int n_eff);

struct BootstrapRow {
  double s = 0.0;
  double con_half = 0.0;  // (E_con^N)^{1/2}
  double c_half = 0.0;    // (E_c^N)^{1/2}
  bool bound = false;     // both bounds with C₁
  bool refined = false;   // both bounds with C₁/2
};

struct BootstrapReport {
  double C0 = 0.0, C1 = 0.0, delta = 0.0, epsilon = 0.0;
  std::vector<BootstrapRow> rows;
  // Minimal C₁ making the bounds hold at the configured δ on the window, and
  // minimal δ making the refined bounds hold with the chosen C₁.
  double fit_C1 = 0.0;
  double fit_delta = 0.0;
  std::optional<double> first_failure_s;  // first s where the C₁ bounds fail
  bool refined_holds = false;             // on [s_lo, s_hi] with fit_delta
  bool holds(double delta_max = 0.1) const { return refined_holds && fit_delta < delta_max; }
};

// C₀ defaults to the larger of (E_con^N)^{1/2}/ε and (E_c^N)^{1/2}/ε on the
// first slice; C₁ defaults to 4C₀.
BootstrapReport bootstrap_check(const EnergyTable& table, const BootstrapConfig& cfg);

// Values at r = 0 on every stored level.
class AxisMonitor : public RunObserver {
 public:
  void on_level(const History& h, double t_ready) override;
  void on_finish(const History& h) override { on_level(h, h.t_last()); }

  std::vector<double> t, u, v, q;

 private:
  std::size_t next_ = 0;
};

struct SharpDecayConfig {
  double s_lo = 4.0, s_hi = 20.0;
  double t_axis_lo = 10.0;  // KG axis window start
  double mass = 1.0;
  double target = -1.5;
  double tol = 0.15;
  double bounded_tol = 0.1;
};

struct SharpDecayReport {
  double slope_tu = 0.0;         // log sup_{H_s} t|u| vs log s
  bool tu_degenerate = false;    // identically zero
  double axis_exponent = 0.0;    // log √(v² + (q/c)²) vs log t at r = 0
  double slice_exponent = 0.0;   // log sup (s/t)^{2δ−2}|v| vs log s
  bool tu_bounded = false;
  bool axis_ok = false;
  bool holds() const { return tu_bounded && axis_ok; }
};

// RangeError when the slices stop before s = 15 or a window is too sparse.
SharpDecayReport sharp_decay_check(const std::vector<SliceReport>& reports,
                                   const AxisMonitor& axis, const SharpDecayConfig& cfg);

// One inequality of the recursion system at one k.
struct RecursionCheck {
  std::string name;
  int k = 0;
  int lower_order_terms = 0;  // RHS terms of rank below k
  double C_min = 0.0;         // minimal C on the fit window (inf if none)
  double worst_ratio = 0.0;   // max lhs/rhs over the full grid at the fitted C
  bool holds = false;
};

struct RecursionReport {
  double C = 0.0;  // single constant shared by every inequality
  double C0 = 0.0, C1 = 0.0, epsilon = 0.0;
  double s_fit_hi = 0.0;
  std::vector<RecursionCheck> checks;
  bool k0_structural = false;  // no k − 1 terms at k = 0
  bool holds() const;
};

struct RecursionConfig {
  double epsilon = 0.01;
  double C0 = 0.0, C1 = 0.0;
  // C is fitted on s ≤ s_fit_hi and verified on the whole grid.
  double s_fit_hi = 12.0;
};

// Certifies the A_k/B_k integral inequalities, the energy recursion and the
// Grönwall induction on the tables by trapezoid quadrature over the s-grid.
RecursionReport recursion_certify(const SupQuantities& sup, const EnergyTable& energy,
                                  const RecursionConfig& cfg);

struct DampingTrajectory {
  CoefficientSet coeffs;
  std::vector<double> s, Ec_v;
  bool overflow = false;
  double overflow_s = 0.0;
};

struct DampingComparison {
  DampingTrajectory damped, violated;
  double max_ratio = 0.0;  // max over common s of violated/damped
  double damped_growth = 0.0;  // max E_c(s, v)/E_c(s₀, v) of the damped run
  std::optional<double> diverged_at;
  bool holds(double factor = 2.0) const {
    return damped_growth <= factor && diverged_at.has_value();
  }
  std::string summary() const;
};

struct DampingOptions {
  RadialGrid grid{};
  double epsilon = 0.05;
  Profile profile = Profile::bump;
  double s_max = 20.0;
  double ds = 0.5;
  double factor = 2.0;
  double cfl = 0.4;
};

// Runs both coefficient sets from identical data; blow-up in either run is
// reported as growth to overflow.
DampingComparison damping_comparison(const CoefficientSet& damped,
                                     const CoefficientSet& violated, const DampingOptions& opt);

}  // namespace wkg
