#pragma once

#include <array>
#include <cmath>
#include <utility>

namespace wkg {

class History;
enum Channel : int;

struct SpacetimePoint {
  double t = 0.0;
  double r = 0.0;

  // Valid only when t > r.
  double s() const { return std::sqrt((t - r) * (t + r)); }
};

// Region 𝒦 = {r < t - 1}.
inline bool inside_cone(const SpacetimePoint& p) { return p.r < p.t - 1.0; }

// Radial reduction of the quadratic form A^{αβ}∂v∂v. p0 multiplies the
// u∂_t v coupling of the Klein-Gordon equation and defaults to the value of
// the model system; h00 and q only enter in extended mode.
struct CoefficientSet {
  double A00 = 0.0;
  double A0r = 0.0;
  double Arr = 0.0;
  double B = 0.0;
  double c = 1.0;
  double h00 = 0.0;
  double p0 = 1.0;
  double q = 0.0;

  bool extended() const { return h00 != 0.0 || q != 0.0; }
  void validate() const;  // throws ConfigError
};

using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec3 = std::array<double, 3>;

// Φ maps the natural frame to the semi-hyperboloidal frame; Ψ = Φ⁻¹.
Mat4 transition_phi(const SpacetimePoint& p, const Vec3& direction);
Mat4 transition_psi(const SpacetimePoint& p, const Vec3& direction);
Mat4 matmul(const Mat4& a, const Mat4& b);

// A00 − 2(r/t)A0r + (r/t)²Arr.
double underline_contract(const CoefficientSet& k, const SpacetimePoint& p);

// Damping holds at p iff the returned value is ≤ 0.
double damping_margin(const CoefficientSet& k, const SpacetimePoint& p);

struct DampingSweep {
  double max_margin = 0.0;
  SpacetimePoint argmax;
  bool holds() const { return max_margin <= 0.0; }
};

// Max of damping_margin over a lattice of interior points with t ∈ [t_min, t_max].
DampingSweep damping_sweep(const CoefficientSet& k, double t_min, double t_max,
                           int samples = 64);

// γ_{t,r}(λ) = (λt/s, λr/s).
SpacetimePoint ray_point(double t, double r, double lambda);
double ray_lambda0(double t, double r, double s0);

// (r∂_t + t∂_r) of a stored field.
double boost_radial(const History& h, Channel field, double t, double r);

}  // namespace wkg
