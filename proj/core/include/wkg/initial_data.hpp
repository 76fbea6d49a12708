#pragma once

#include <string_view>

#include "wkg/radial_grid.hpp"

namespace wkg {

enum class Profile { bump, gaussian_truncated };

Profile profile_from_name(std::string_view name);  // throws ConfigError

// χ(r) = exp(1 − 1/(1 − r²)) on r < 1, zero elsewhere; χ(0) = 1.
double bump(double r);
// exp(−8r²)·χ(r)^{1/4}: Gaussian shape, still smooth with support r < 1.
double gaussian_truncated(double r);
double profile_value(Profile p, double r);

constexpr double kInitialTime = 2.0;

// u = v = εχ(r), ∂_t u = ∂_t v = 0 at t = 2.
FieldState make_initial_data(const RadialGrid& grid, double epsilon,
                             Profile profile = Profile::bump);

}  // namespace wkg
