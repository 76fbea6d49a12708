#include "wkg/stencil.hpp"

#include <algorithm>
#include <array>
#include <cassert>

namespace wkg {

void fornberg_weights(double x0, std::span<const double> x, int max_order,
                      std::span<double> out) {
  const int n = static_cast<int>(x.size());
  const int m = max_order;
  assert(static_cast<int>(out.size()) >= (m + 1) * n);
  auto w = [&](int k, int j) -> double& { return out[k * n + j]; };
  std::fill(out.begin(), out.begin() + (m + 1) * n, 0.0);
  w(0, 0) = 1.0;
  double c1 = 1.0;
  double c4 = x[0] - x0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          w(k, i) = c1 * (k * w(k - 1, i - 1) - c5 * w(k, i - 1)) / c2;
        w(0, i) = -c1 * c5 * w(0, i - 1) / c2;
      }
      for (int k = mn; k >= 1; --k) w(k, j) = (c4 * w(k, j) - k * w(k - 1, j)) / c3;
      w(0, j) = c4 * w(0, j) / c3;
    }
    c1 = c2;
  }
}

void uniform_weights(double x0, int first, int width, int max_order, std::span<double> out) {
  std::array<double, 16> nodes{};
  assert(width <= 16);
  for (int j = 0; j < width; ++j) nodes[j] = static_cast<double>(first + j);
  fornberg_weights(x0, std::span<const double>(nodes.data(), width), max_order, out);
}

}  // namespace wkg
