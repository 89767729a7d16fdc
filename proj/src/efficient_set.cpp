#include "npcall/efficient_set.hpp"

#include "npcall/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace npcall {

namespace {

constexpr double kShapeTol = 1e-12;

} // namespace

EfficientCurve::EfficientCurve(std::vector<double> strikes, std::vector<double> prices,
                               std::shared_ptr<const QuoteCurve> source, std::vector<std::size_t> source_index)
    : strikes_(std::move(strikes)), prices_(std::move(prices)), source_(std::move(source)),
      source_index_(std::move(source_index)) {
    if (strikes_.size() != prices_.size())
        throw InvalidCurveError("efficient strikes and prices differ in length");
    if (strikes_.size() < 2)
        throw InsufficientStrikesError("efficient set needs strike 0 and at least one option");
    if (strikes_.front() != 0.0)
        throw InvalidCurveError("efficient set must start at strike 0");
    double prev_slope = 0.0;
    for (std::size_t i = 0; i < strikes_.size(); ++i) {
        if (!(prices_[i] > 0.0))
            throw InvalidCurveError("efficient prices must be positive");
        if (i == 0)
            continue;
        if (!(strikes_[i] > strikes_[i - 1]))
            throw InvalidCurveError("efficient strikes must be strictly increasing");
        const double s = slope(i - 1);
        // near-collinear hull points may be out of order by a rounding error
        const double scale = std::max({1.0, std::abs(s), std::abs(prev_slope)});
        if (s > kShapeTol * scale)
            throw InvalidCurveError("efficient prices must be non-increasing");
        if (i > 1 && s < prev_slope - kShapeTol * scale)
            throw InvalidCurveError("efficient prices must be convex in strike");
        prev_slope = s;
    }
}

std::vector<bool> EfficientCurve::efficiency_flags() const {
    std::vector<bool> flags(source_ ? source_->size() : 0, false);
    for (std::size_t idx : source_index_)
        flags[idx] = true;
    return flags;
}

QuoteCurve EfficientCurve::as_quote_curve() const {
    if (!source_)
        return QuoteCurve(strikes_, prices_);
    std::vector<std::int64_t> sizes;
    if (!source_->ask_sizes().empty() && source_index_.size() == strikes_.size())
        for (std::size_t i : source_index_)
            sizes.push_back(source_->ask_sizes()[i]);
    return QuoteCurve(strikes_, prices_, source_->maturity(), source_->spot_hint(), std::move(sizes),
                      source_->observed_at());
}

EfficientCurve efficient_set(const QuoteCurve& curve) {
    if (curve.size() < 2)
        throw InsufficientStrikesError("curve has only the underlying");
    const auto k = curve.strikes();
    const auto q = curve.asks();

    // Lower convex hull by monotone chain; points on a chord are kept.
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < k.size(); ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2], b = hull.back();
            const double lhs = (k[b] - k[a]) * (q[i] - q[a]);
            const double rhs = (q[b] - q[a]) * (k[i] - k[a]);
            const double tol = 1e-13 * (std::abs(lhs) + std::abs(rhs));
            if (lhs - rhs < -tol)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }

    // Past the cheapest point the hull rises; those strikes are dominated by
    // the cheaper lower strike.
    std::vector<std::size_t> keep{hull.front()};
    for (std::size_t n = 1; n < hull.size(); ++n) {
        if (q[hull[n]] <= q[keep.back()])
            keep.push_back(hull[n]);
        else
            break;
    }

    std::vector<double> ks, qs;
    for (std::size_t idx : keep) {
        ks.push_back(k[idx]);
        qs.push_back(q[idx]);
    }
    return EfficientCurve(std::move(ks), std::move(qs), std::make_shared<const QuoteCurve>(curve), std::move(keep));
}

double q0_at(const EfficientCurve& eff, double k) {
    const auto j = eff.strikes();
    const auto q = eff.prices();
    if (k <= 0.0)
        return q.front();
    if (k > j.back())
        return q.back();
    // first j_{i+1} >= k
    const auto it = std::lower_bound(j.begin(), j.end(), k);
    const std::size_t i1 = static_cast<std::size_t>(it - j.begin());
    if (*it == k)
        return q[i1];
    const std::size_t i0 = i1 - 1;
    const double w = (j[i1] - k) / (j[i1] - j[i0]);
    return w * q[i0] + (1.0 - w) * q[i1];
}

std::vector<StepLevel> nu0(const EfficientCurve& eff) {
    std::vector<StepLevel> out;
    const auto j = eff.strikes();
    for (std::size_t i = 0; i + 1 < j.size(); ++i)
        out.push_back({j[i], j[i + 1], -eff.slope(i)});
    out.push_back({j.back(), std::numeric_limits<double>::infinity(), 0.0});
    return out;
}

double nu0_at(const EfficientCurve& eff, double k) {
    const auto j = eff.strikes();
    if (k > j.back())
        return 0.0;
    if (k <= 0.0)
        return -eff.slope(0);
    const auto it = std::lower_bound(j.begin(), j.end(), k);
    return -eff.slope(static_cast<std::size_t>(it - j.begin()) - 1);
}

} // namespace npcall
