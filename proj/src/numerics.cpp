#include "npcall/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace npcall {

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb, double m,
               double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol)
        return left + right + diff / 15.0;
    return simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double panel(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    // Ends are sampled just inside the panel so a jump on a breakpoint takes
    // the value from the panel's own side.
    const double nudge = 1e-13 * (b - a);
    const double fa = f(a + nudge), fb = f(b - nudge), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 std::span<const double> breakpoints) {
    if (!(b > a))
        return 0.0;
    std::vector<double> cuts{a};
    for (double x : breakpoints)
        if (x > a && x < b)
            cuts.push_back(x);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    const double share = tol / static_cast<double>(cuts.size() - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += panel(f, cuts[i], cuts[i + 1], share);
    return total;
}

double bisect_first(const std::function<bool(double)>& pred, double lo, double hi, double xtol) {
    if (pred(lo))
        return lo;
    for (int it = 0; it < 200 && hi - lo > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

} // namespace npcall
