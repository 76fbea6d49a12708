#include "wkg/radial_grid.hpp"

#include <cmath>
#include <string>

#include "wkg/errors.hpp"

namespace wkg {

RadialGrid::RadialGrid(double r_max_, int n_) : r_max(r_max_), n(n_) {
  if (n < 16) throw ConfigError("radial grid needs at least 16 points");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw ConfigError("r_max must be positive");
}

namespace {
constexpr std::array<std::string_view, kChannelCount> kNames = {
    "u", "p", "v", "q", "uL", "pL", "ug", "pg", "wb", "pb"};
}

std::string_view channel_name(Channel c) { return kNames.at(c); }

Channel channel_from_name(std::string_view name) {
  for (int i = 0; i < kChannelCount; ++i)
    if (kNames[i] == name) return static_cast<Channel>(i);
  throw ArgumentError("unknown field channel '" + std::string(name) + "'");
}

FieldState::FieldState(double t_, int n, int n_channels) : t(t_) {
  for (int c = 0; c < n_channels; ++c) ch[c].assign(n, 0.0);
}

}  // namespace wkg
