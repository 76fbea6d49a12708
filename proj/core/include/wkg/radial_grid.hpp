#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace wkg {

struct RadialGrid {
  double r_max = 0.0;
  int n = 0;

  RadialGrid() = default;
  RadialGrid(double r_max, int n);  // throws ConfigError unless n ≥ 16, r_max > 0

  double dr() const { return r_max / (n - 1); }
  double r(int i) const { return i * dr(); }
};

// Storage channels. Each value channel is paired with its time derivative
// (the "rate" channel). The first four are the evolved unknowns; the rest are
// the auxiliary wave problems of the decomposition u = u_L + u_g + u_b.
enum Channel : int {
  kU = 0,
  kP,   // ∂_t u
  kV,
  kQ,   // ∂_t v
  kUL,
  kPL,
  kUG,
  kPG,
  kWB,  // u_b + κv²
  kPB,
  kChannelCount
};

constexpr bool is_value_channel(Channel c) { return c % 2 == 0; }
constexpr Channel rate_of(Channel c) { return static_cast<Channel>(c + 1); }
std::string_view channel_name(Channel c);
Channel channel_from_name(std::string_view name);  // throws ArgumentError

// One time level. An empty channel vector means the channel is absent and
// reads as zero.
struct FieldState {
  double t = 0.0;
  std::array<std::vector<double>, kChannelCount> ch;

  FieldState() = default;
  FieldState(double t, int n, int n_channels = 4);

  bool has(Channel c) const { return !ch[c].empty(); }
  int size() const { return static_cast<int>(ch[kU].size()); }

  std::vector<double>& u() { return ch[kU]; }
  std::vector<double>& p() { return ch[kP]; }
  std::vector<double>& v() { return ch[kV]; }
  std::vector<double>& q() { return ch[kQ]; }
  const std::vector<double>& u() const { return ch[kU]; }
  const std::vector<double>& p() const { return ch[kP]; }
  const std::vector<double>& v() const { return ch[kV]; }
  const std::vector<double>& q() const { return ch[kQ]; }
};

}  // namespace wkg
