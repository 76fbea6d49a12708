#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "wkg/evolver.hpp"
#include "wkg/frame_geometry.hpp"
#include "wkg/history.hpp"

namespace wkg {

using ScalarField = std::function<double(double t, double r)>;

// |□v − RHS| where RHS is the hyperboloidal form
//   s^{−3/2}ℒ²(s^{3/2}v) − (r²/s²)∂̄ρ²v − (∂̄ρ²v + (2/r)∂̄ρv) − (3r/s²)∂̄ρv − 3v/(4s²),
// every derivative taken by centered differences of step h (ℒ along the ray,
// ∂̄ρ along H_s).
double box_identity_residual(const ScalarField& v, const SpacetimePoint& p, double h);

// w″ − D w′ + c²w = f on [lambda0, lambda1].
struct OdeProblem {
  double c = 1.0;
  double lambda0 = 2.0;
  double lambda1 = 20.0;
  std::function<double(double)> D;
  std::function<double(double)> f;
  double w0 = 0.0;
  double wp0 = 0.0;
  std::function<double(double)> S;  // optional barrier with D + S ≤ 0
  std::optional<double> C_S;        // defaults to ∫|S|
};

// Piecewise-linear interpolant of samples on a uniform grid.
std::function<double(double)> sampled(double lambda0, double dlambda, std::vector<double> values);

struct OdeSolution {
  std::vector<double> lambda, w, wp;
  bool hypothesis_violated = false;  // |D| > c somewhere
  bool diagonalized = false;
  std::vector<std::complex<double>> wt_plus, wt_minus;  // W̃ = P⁻¹(w′, w)
  double reassembly_error = 0.0;  // max |P W̃ − (w′, w)|
};

// RK4 on (w′, w)′ = [[D, −c²], [1, 0]](w′, w) + (f, 0); the diagonal system
// W̃′ = (diag(p±) − P⁻¹P′)W̃ + P⁻¹(f, 0) is integrated independently in
// complex arithmetic and reassembled.
OdeSolution ode_integrate(const OdeProblem& prob, double dt);

// e^{dλ/2}(A cos ωλ + B sin ωλ) for D ≡ d, f ≡ 0, with λ measured from lambda0.
double ode_closed_form(double c, double d, double w0, double wp0, double dl);

struct BarrierReport {
  double lhs = 0.0;   // sup(|w| + |w′|)
  double data = 0.0;  // |w(λ₀)| + |w′(λ₀)| + ∫|f|
  double K = 0.0;
  double C_S = 0.0;
  double bound = 0.0;  // 10·e^{C_S/2}
  bool holds = true;
  bool hypothesis_violated = false;
};

// Throws PreconditionError if D + S > 0 somewhere or ∫|S| exceeds C_S.
BarrierReport barrier_bound_check(const OdeProblem& prob, double dt = 1e-3);

enum class RayCoupling { none, u, u_b };

struct RaySpec {
  double s0 = 2.0;
  RayCoupling coupling = RayCoupling::none;
  double p0 = 1.0;     // h = p0·u or p0·u_b
  double c = 1.0;
  double kappa = 0.0;  // u_b = w_b − κv²
  double step = 0.0;   // spacetime step; 0 means min(history dt, dr)
};

struct RayTrace {
  double t = 0.0, r = 0.0, s = 0.0, lambda0 = 0.0, dlambda = 0.0;
  std::vector<double> lambda, w, wp, D, R1, R2, F, residual;
  std::vector<double> defect;  // signed residual
  std::vector<double> v, vt, vr, Lv;  // field samples along the ray
  bool complete() const { return !lambda.empty() && v.size() == lambda.size(); }
  double max_residual() const;
};

// λ grid of a ray: uniform from λ₀ to s.
RayTrace make_ray(double t, double r, const RaySpec& spec, double step);

// Fills sample i of the trace from the stored fields.
void sample_ray(const History& h, const RaySpec& spec, RayTrace& tr, std::size_t i);

// 5-point w″ and the residual |w″ − Dw′ + c²w − (R₁ + R₂ + F)| at every sample
// (one-sided stencils at the ends).
void finish_ray(RayTrace& tr, double c);

RayTrace ray_consistency(const History& h, double t, double r, const RaySpec& spec);

// Samples rays as the run advances.
class RayMonitor : public RunObserver {
 public:
  RayMonitor(std::vector<std::pair<double, double>> bases, RaySpec spec, double step);
  void on_level(const History& h, double t_ready) override;
  void on_finish(const History& h) override;
  const std::vector<RayTrace>& traces() const { return traces_; }

 private:
  RaySpec spec_;
  std::vector<RayTrace> traces_;
  std::vector<std::size_t> next_;
};

struct SharpDecay {
  double lhs = 0.0;  // (s/t)^η s^{3/2}(|v| + (s/t)|∂v|) at the base
  double V = 0.0;
  bool near_region = false;
  double ratio() const { return V > 0.0 ? lhs / V : 0.0; }
};

// V(t, x) by trapezoid quadrature of |R₁ + R₂ + F| along a complete trace.
// sup_s0 is sup_{H_{s0}}(|v| + |∂v|), used in the near region only.
SharpDecay sharp_decay_from_trace(const RayTrace& tr, double eta, double s0, double sup_s0);

SharpDecay sharp_decay_estimate(const History& h, double t, double r, double eta,
                                const RaySpec& spec);

}  // namespace wkg
