#include "npcall/implied_measure.hpp"

#include "npcall/error.hpp"
#include "npcall/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace npcall {

SmoothCallCurve::SmoothCallCurve(EfficientCurve eff, Smoother smoother, double h)
    : eff_(std::move(eff)), smoother_(std::move(smoother)), h_(h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw ConfigError("h", "bandwidth must be positive");
    b_ = dual_coefficients(eff_);
    if (eff_.size() > 1 && h_ >= eff_.strikes()[1])
        warnings_.push_back("bandwidth " + std::to_string(h_) + " reaches the smallest positive strike " +
                            std::to_string(eff_.strikes()[1]) + "; the window around low strikes crosses 0");
}

double SmoothCallCurve::price(double k) const {
    const auto j = eff_.strikes();
    double v = b_.back();
    for (std::size_t i = 1; i < j.size(); ++i)
        v += b_[i - 1] * h_ * smoother_.G((j[i] - k) / h_);
    return v;
}

double SmoothCallCurve::survival(double k) const {
    const auto j = eff_.strikes();
    double v = 0.0;
    for (std::size_t i = 1; i < j.size(); ++i)
        v += b_[i - 1] * smoother_.dG((j[i] - k) / h_);
    return v;
}

double SmoothCallCurve::density(double k) const {
    const auto j = eff_.strikes();
    double v = 0.0;
    for (std::size_t i = 1; i < j.size(); ++i)
        v += b_[i - 1] * smoother_.d2G((j[i] - k) / h_);
    return v / h_;
}

std::vector<double> SmoothCallCurve::weights(double k) const {
    return superhedge_price(smoother_.payoff(k, h_), eff_).w;
}

SmoothCallCurve smooth_call_curve(const EfficientCurve& eff, const Smoother& smoother, double delta,
                                  const MeshStats& mesh) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw ConfigError("delta", "must be positive");
    if (!(mesh.mesh_all > 0.0))
        throw ConfigError("mesh", "mesh must be positive");
    return SmoothCallCurve(eff, smoother, delta * mesh.mesh_all);
}

ImpliedMeasure::ImpliedMeasure(double beta, Fn survival, std::optional<Fn> density, double support_lo,
                               double support_hi, double upper, std::vector<double> breakpoints, double price_scale)
    : beta_(beta), survival_(std::move(survival)), density_(std::move(density)), lo_(support_lo), hi_(support_hi),
      upper_(upper), breaks_(std::move(breakpoints)), scale_(price_scale) {
    std::sort(breaks_.begin(), breaks_.end());
}

double ImpliedMeasure::density(double x) const {
    if (!density_)
        throw DegenerateMeasureError("measure has no density");
    return (*density_)(x);
}

ImpliedMeasure implied_survival(const SmoothCallCurve& curve) {
    auto c = std::make_shared<const SmoothCallCurve>(curve);
    const auto& eff = curve.efficient();
    const auto j = eff.strikes();
    const double h = curve.h();

    std::vector<double> breaks;
    const double supp = curve.smoother().support();
    for (std::size_t i = 1; i < j.size(); ++i) {
        breaks.push_back(j[i]);
        if (std::isfinite(supp)) {
            // Knots of g_k^h seen from k: j_i - h t for each unit knot t.
            const int N = std::max(curve.smoother().N(), 1);
            for (int m = 0; m <= N; ++m)
                breaks.push_back(j[i] - h * supp * (-1.0 + 2.0 * m / N));
        }
    }
    const double lo = j.size() > 1 ? j[1] : 0.0;
    return ImpliedMeasure(
        eff.prices().back(), [c](double t) { return c->survival(t); },
        ImpliedMeasure::Fn([c](double x) { return c->density(x); }), lo, j.back(), j.back() + 10.0 * h,
        std::move(breaks), eff.prices().front());
}

ImpliedMeasure step_measure(const EfficientCurve& eff) {
    auto levels = std::make_shared<const std::vector<StepLevel>>(nu0(eff));
    auto surv = [levels](double t) {
        // Right-continuous: level of the piece [lo, hi).
        for (const auto& s : *levels)
            if (t < s.hi)
                return t >= s.lo ? s.level : (*levels).front().level;
        return 0.0;
    };
    const auto j = eff.strikes();
    std::vector<double> breaks(j.begin(), j.end());
    return ImpliedMeasure(eff.prices().back(), surv, std::nullopt, j.size() > 1 ? j[1] : 0.0, j.back(), j.back(),
                          std::move(breaks), eff.prices().front());
}

double reconstruct_price(const ImpliedMeasure& m, double t) {
    if (t >= m.upper())
        return m.beta();
    const double tol = 1e-9 * m.price_scale();
    return m.beta() + integrate([&m](double z) { return m.survival(z); }, t, m.upper(), tol, m.breakpoints());
}

RiskReport var_cvar(const ImpliedMeasure& m, double position_price, const std::vector<double>& levels,
                    std::optional<std::pair<double, double>> window) {
    if (!(position_price > 0.0))
        throw ConfigError("position_price", "must be positive");
    const auto [lo, hi] = window.value_or(std::make_pair(m.support_lo(), m.support_hi()));
    if (!(hi > lo))
        throw ConfigError("window", "upper end must exceed lower end");
    for (double a : levels)
        if (!(a > 0.0 && a <= 1.0))
            throw ConfigError("levels", "levels must lie in (0, 1]");

    const double s_lo = m.survival(lo), s_hi = m.survival(hi);
    const double mass = s_lo - s_hi;
    if (!(mass > 1e-14 * std::max(1.0, s_lo)))
        throw DegenerateMeasureError("no implied mass on the conditioning window");

    auto cdf = [&](double t) {
        if (t <= lo)
            return 0.0;
        if (t >= hi)
            return 1.0;
        return std::clamp((s_lo - m.survival(t)) / mass, 0.0, 1.0);
    };
    const double xtol = 1e-13 * std::max(1.0, std::abs(hi));
    const double tol = 1e-9 * m.price_scale();

    RiskReport r;
    r.levels = levels;
    r.position_price = position_price;
    r.window_lo = lo;
    r.window_hi = hi;
    r.window_mass = mass;
    for (double a : levels) {
        const double q = bisect_first([&](double t) { return cdf(t) >= a; }, lo, hi, xtol);
        // E[X | X <= Q] in the alpha-tail sense, atoms included:
        // Q - (1/alpha) int_lo^Q F(t) dt
        const double tail_mean = q - integrate(cdf, lo, q, tol, m.breakpoints()) / a;
        r.quantile.push_back(q);
        r.var.push_back(position_price - q);
        r.cvar.push_back(position_price - tail_mean);
    }
    return r;
}

} // namespace npcall
