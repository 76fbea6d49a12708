#pragma once

#include <span>
#include <vector>

namespace wkg {

// Finite-difference weights for derivatives 0..max_order at x0 from the nodes
// x (Fornberg's recursion). Result is indexed [order * x.size() + j].
void fornberg_weights(double x0, std::span<const double> x, int max_order,
                      std::span<double> out);

// Same for equally spaced integer nodes first, first+1, ..., evaluated at x0
// in units of the spacing; derivatives are returned per unit spacing.
void uniform_weights(double x0, int first, int width, int max_order, std::span<double> out);

}  // namespace wkg
