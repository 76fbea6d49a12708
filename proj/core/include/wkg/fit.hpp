#pragma once

#include <span>
#include <vector>

namespace wkg {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

// Least-squares line y = intercept + slope·x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Fit of log y against log x over points with x in [x_lo, x_hi] and y > 0.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y, double x_lo,
                   double x_hi);

// Local maxima of |y| (one per oscillation), for decay fits of oscillating signals.
void envelope_peaks(std::span<const double> x, std::span<const double> y,
                    std::vector<double>& px, std::vector<double>& py);

// max |y_i − y_ref| / |y_ref| over the given samples.
double relative_drift(std::span<const double> y, double y_ref);

// max/min − 1 over positive samples.
double relative_variation(std::span<const double> y);

}  // namespace wkg
