#pragma once

#include <vector>

#include "wkg/evolver.hpp"
#include "wkg/frame_geometry.hpp"
#include "wkg/history.hpp"
#include "wkg/slice_diag.hpp"

namespace wkg {

// κ = B/(2c²), the multiple of v² that removes the Bv² source.
double decomposition_kappa(const CoefficientSet& k);

// Source of □u_g: the full source of □(u + κv²) minus the u_b part,
//   A∂v∂v + (B/c²)(q² − v_r²) + (B/c²)p0·uvq − (A̲00 + (B/c²)(s/t)²)q².
NodeSource ug_source(const CoefficientSet& k);
// Source of □(u_b + κv²): (A̲00 + (B/c²)(s/t)²)q².
NodeSource wb_source(const CoefficientSet& k);

// Data of the three auxiliary problems on the initial slice: u_L gets
// (u₀ + κv₀², u₁ + 2κv₀v₁), the others vanish.
void set_decomposition_data(FieldState& s, const CoefficientSet& k);

// Registers u_L, u_g and w_b = u_b + κv² as co-evolved waves and sets their data.
void enable_decomposition(Evolver& e, FieldState& s);

// Post-hoc splitting of a stored run. `combined` carries the run's channels
// plus uL/ug/wb (and rates) on the same time levels.
struct Decomposition {
  double kappa = 0.0;
  CoefficientSet coeffs;
  History combined;
};

Decomposition decompose(const History& run, const CoefficientSet& k, int stride,
                        EvolverOptions opt = {});

struct SignReport {
  double max_wb = 0.0;      // signed max of u_b + κv² over the masked cone
  double t_at = 0.0, r_at = 0.0;
  double scale = 0.0;       // sup |u_b + κv²|
  double tol = 0.0;         // 10·dr²·scale
  double max_residual = 0.0;  // sup |u − (u_L + u_g + u_b)|
  int levels = 0;
  bool holds() const { return max_wb <= tol; }
};

// Sweeps every stored level (masked cone r < t − 1 − margin·dr) as the run advances.
class DecompositionMonitor : public RunObserver {
 public:
  DecompositionMonitor(double kappa, int margin_cells = 2) : kappa_(kappa), margin_(margin_cells) {}
  void on_level(const History& h, double t_ready) override;
  void on_finish(const History& h) override;
  SignReport report(double dr) const;

 private:
  double kappa_;
  int margin_;
  std::size_t next_ = 0;
  bool any_ = false;
  SignReport rep_;
};

// Throws PreconditionError unless the damping condition holds on the cone.
SignReport sign_certificate(const Decomposition& dec);
void require_damping(const CoefficientSet& k, double t_min, double t_max);

struct DecayFit {
  double slope_uL = 0.0, slope_ug = 0.0;
  bool degenerate_uL = false, degenerate_ug = false;  // identically zero in the window
  bool bounded(double tol = 0.1) const {
    return (degenerate_uL || slope_uL <= tol) && (degenerate_ug || slope_ug <= tol);
  }
};

// Log-log fits of sup (t/s)^{1/2}s^{3/2}|u_L| and |u_g| over s ∈ [s_lo, s_max].
DecayFit decay_rates(const std::vector<SliceReport>& reports, double s_lo = 4.0);

struct ProbeResult {
  double mu = 0.0, nu = 0.0, C_f = 0.0;
  std::vector<double> t, weighted_sup;
  double slope = 0.0;
  double measured_sup = 0.0;
  bool bounded(double tol = 0.1) const { return slope <= tol; }
};

// Smooth step: 0 for x ≤ 1, 1 for x ≥ 2.
double cone_cutoff(double x);

// C_f·t^{−2−ν}(t − r)^{−1+μ}·cutoff(t − r).
double probe_source(double mu, double nu, double C_f, double t, double r);

struct ProbeOptions {
  RadialGrid grid{};
  double t_final = 40.0;
  double t_fit_lo = 4.0;
  int stride = 5;
  double cfl = 0.4;
};

ProbeResult linear_decay_probe(double mu, double nu, double C_f, const ProbeOptions& opt);

}  // namespace wkg
