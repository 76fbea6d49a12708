#include "wkg/fit.hpp"

#include <algorithm>
#include <cmath>

#include "wkg/errors.hpp"

namespace wkg {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("fit_line: size mismatch");
  LineFit f;
  f.points = static_cast<int>(x.size());
  if (f.points < 2) throw RangeError("fit_line: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= f.points;
  my /= f.points;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw RangeError("fit_line: degenerate abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y, double x_lo,
                   double x_hi) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < x_lo || x[i] > x_hi || !(y[i] > 0.0) || !(x[i] > 0.0)) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

void envelope_peaks(std::span<const double> x, std::span<const double> y,
                    std::vector<double>& px, std::vector<double>& py) {
  px.clear();
  py.clear();
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double a = std::abs(y[i - 1]), b = std::abs(y[i]), c = std::abs(y[i + 1]);
    if (b > a && b >= c) {
      px.push_back(x[i]);
      py.push_back(b);
    }
  }
}

double relative_drift(std::span<const double> y, double y_ref) {
  double d = 0.0;
  for (double v : y) d = std::max(d, std::abs(v - y_ref));
  return y_ref != 0.0 ? d / std::abs(y_ref) : d;
}

double relative_variation(std::span<const double> y) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (double v : y) {
    if (!(v > 0.0)) continue;
    lo = any ? std::min(lo, v) : v;
    hi = any ? std::max(hi, v) : v;
    any = true;
  }
  return any ? hi / lo - 1.0 : 0.0;
}

}  // namespace wkg
