#include "wkg/initial_data.hpp"

#include <cmath>
#include <string>

#include "wkg/errors.hpp"

namespace wkg {

Profile profile_from_name(std::string_view name) {
  if (name == "bump") return Profile::bump;
  if (name == "gaussian-truncated" || name == "gaussian_truncated")
    return Profile::gaussian_truncated;
  throw ConfigError("unknown data profile '" + std::string(name) + "'");
}

double bump(double r) {
  r = std::abs(r);
  if (r >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / ((1.0 - r) * (1.0 + r)));
}

double gaussian_truncated(double r) {
  const double b = bump(r);
  return b == 0.0 ? 0.0 : std::exp(-8.0 * r * r) * std::sqrt(std::sqrt(b));
}

double profile_value(Profile p, double r) {
  return p == Profile::bump ? bump(r) : gaussian_truncated(r);
}

FieldState make_initial_data(const RadialGrid& grid, double epsilon, Profile profile) {
  if (!(epsilon >= 0.0)) throw ArgumentError("initial data amplitude must be nonnegative");
  FieldState s(kInitialTime, grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double x = epsilon * profile_value(profile, grid.r(i));
    s.u()[i] = x;
    s.v()[i] = x;
  }
  return s;
}

}  // namespace wkg
