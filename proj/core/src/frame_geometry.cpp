#include "wkg/frame_geometry.hpp"

#include <algorithm>
#include <string>

#include "wkg/errors.hpp"
#include "wkg/history.hpp"

namespace wkg {

void CoefficientSet::validate() const {
  for (double x : {A00, A0r, Arr, B, c, h00, p0, q}) {
    if (!std::isfinite(x)) throw ConfigError("coefficients must be finite");
  }
  if (!(c > 0.0)) throw ConfigError("Klein-Gordon mass c must be positive");
}

namespace {

void require_cone(const SpacetimePoint& p, const char* who) {
  if (!(p.t > p.r + 1.0) || p.r < 0.0) {
    throw DomainError(std::string(who) + ": point (t=" + std::to_string(p.t) +
                      ", r=" + std::to_string(p.r) + ") is outside the cone");
  }
}

Mat4 transition(const SpacetimePoint& p, const Vec3& n, double sign, const char* who) {
  require_cone(p, who);
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  // Row a of the frame ∂̄_a = (x^a/t)∂_t + ∂_a.
  for (int a = 0; a < 3; ++a) m[a + 1][0] = sign * p.r * n[a] / p.t;
  return m;
}

}  // namespace

Mat4 transition_phi(const SpacetimePoint& p, const Vec3& n) {
  return transition(p, n, 1.0, "transition_phi");
}

Mat4 transition_psi(const SpacetimePoint& p, const Vec3& n) {
  return transition(p, n, -1.0, "transition_psi");
}

Mat4 matmul(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

double underline_contract(const CoefficientSet& k, const SpacetimePoint& p) {
  if (!(p.t > p.r) || p.r < 0.0) throw DomainError("underline_contract: t must exceed r");
  const double x = p.r / p.t;
  return k.A00 - 2.0 * x * k.A0r + x * x * k.Arr;
}

double damping_margin(const CoefficientSet& k, const SpacetimePoint& p) {
  const double x = p.r / p.t;
  return underline_contract(k, p) + (k.B / (k.c * k.c)) * (1.0 - x) * (1.0 + x);
}

DampingSweep damping_sweep(const CoefficientSet& k, double t_min, double t_max, int samples) {
  DampingSweep out;
  bool first = true;
  for (int i = 0; i < samples; ++i) {
    const double t = t_min + (t_max - t_min) * (i + 0.5) / samples;
    if (t <= 1.0) continue;
    for (int j = 0; j < samples; ++j) {
      const SpacetimePoint p{t, (t - 1.0) * (j + 0.5) / samples};
      const double m = damping_margin(k, p);
      if (first || m > out.max_margin) {
        out.max_margin = m;
        out.argmax = p;
        first = false;
      }
    }
  }
  return out;
}

SpacetimePoint ray_point(double t, double r, double lambda) {
  if (!(t > r)) throw DomainError("ray_point: base point must satisfy t > r");
  if (!(lambda > 0.0)) throw DomainError("ray_point: lambda must be positive");
  // λ/s first so that λ = s returns the base point exactly.
  const double f = lambda / SpacetimePoint{t, r}.s();
  return {f * t, f * r};
}

double ray_lambda0(double t, double r, double s0) {
  if (!(t > r)) throw DomainError("ray_lambda0: base point must satisfy t > r");
  const double split = (s0 * s0 - 1.0) / (s0 * s0 + 1.0);
  if (r / t <= split) return s0;
  return std::sqrt((t + r) / (t - r));
}

double boost_radial(const History& h, Channel field, double t, double r) {
  return r * h.interp(field, t, r, 1, 0) + t * h.interp(field, t, r, 0, 1);
}

}  // namespace wkg
