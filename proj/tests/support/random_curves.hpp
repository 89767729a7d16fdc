#pragma once

#include "npcall/quotes.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace testutil {

// Random positive asks on a random increasing strike set starting at 0. The
// asks come from a decreasing convex curve with additive noise, so the
// efficient set is a proper subset most of the time.
inline npcall::QuoteCurve random_curve(std::mt19937_64& rng, int n_strikes, double noise = 0.5) {
    std::uniform_real_distribution<double> gap(1.0, 20.0), unit(0.0, 1.0);
    std::vector<double> k{0.0};
    for (int i = 0; i < n_strikes; ++i)
        k.push_back(k.back() + gap(rng) + (i == 0 ? 50.0 : 0.0));
    const double spot = k[1] + 20.0 + 30.0 * unit(rng);
    std::vector<double> q{spot};
    for (int i = 1; i <= n_strikes; ++i) {
        const double x = k[static_cast<std::size_t>(i)];
        const double base = 10.0 * std::exp(-(x - k[1]) / (10.0 + 40.0 * unit(rng))) + 0.2;
        q.push_back(std::max(base + noise * (2.0 * unit(rng) - 1.0), 0.05));
    }
    return npcall::QuoteCurve(k, q);
}

} // namespace testutil
