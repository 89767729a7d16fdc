#pragma once

#include <functional>
#include <span>

namespace npcall {

// Adaptive Simpson on [a, b] to absolute tolerance tol. The interval is first
// split at any breakpoints inside it, so kinks and jumps sit on panel edges.
double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 std::span<const double> breakpoints = {});

// Smallest t in [lo, hi] (to within xtol) with pred(t) true, for a predicate
// that is false then true along the interval.
double bisect_first(const std::function<bool(double)>& pred, double lo, double hi, double xtol);

} // namespace npcall
