#pragma once

#include "npcall/efficient_set.hpp"
#include "npcall/quotes.hpp"
#include "npcall/smoothers.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace npcall {

// q^h(k) = sum_{i=1..I} b_i g_k^h(j_i) + b_{I+1}: the superhedging price of the
// smoothed CALL g_k^h, for every k at once.
class SmoothCallCurve {
public:
    SmoothCallCurve(EfficientCurve eff, Smoother smoother, double h);

    const EfficientCurve& efficient() const noexcept { return eff_; }
    const Smoother& smoother() const noexcept { return smoother_; }
    double h() const noexcept { return h_; }
    // b_1..b_{I+1}
    std::span<const double> b() const noexcept { return b_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    double price(double k) const;
    // -dq/dk
    double survival(double k) const;
    // d2q/dk2
    double density(double k) const;
    // Portfolio weights on j_0..j_I of the cheapest superhedge of g_k^h.
    std::vector<double> weights(double k) const;

private:
    EfficientCurve eff_;
    Smoother smoother_;
    double h_;
    std::vector<double> b_;
    std::vector<std::string> warnings_;
};

// Bandwidth h = delta * mesh.mesh_all. Throws ConfigError for delta <= 0.
SmoothCallCurve smooth_call_curve(const EfficientCurve& eff, const Smoother& smoother, double delta,
                                  const MeshStats& mesh);

// beta plus a survival function nu(x > t), optionally with a density.
class ImpliedMeasure {
public:
    using Fn = std::function<double(double)>;

    // survival must vanish beyond `upper`; breakpoints mark kinks or jumps and
    // guide the quadrature. price_scale sets the integration tolerance.
    ImpliedMeasure(double beta, Fn survival, std::optional<Fn> density, double support_lo, double support_hi,
                   double upper, std::vector<double> breakpoints, double price_scale);

    double beta() const noexcept { return beta_; }
    double survival(double t) const { return survival_(t); }
    bool has_density() const noexcept { return density_.has_value(); }
    double density(double x) const;
    // [j_1, j_I]
    double support_lo() const noexcept { return lo_; }
    double support_hi() const noexcept { return hi_; }
    double upper() const noexcept { return upper_; }
    std::span<const double> breakpoints() const noexcept { return breaks_; }
    double price_scale() const noexcept { return scale_; }

private:
    double beta_;
    Fn survival_;
    std::optional<Fn> density_;
    double lo_, hi_, upper_;
    std::vector<double> breaks_;
    double scale_;
};

ImpliedMeasure implied_survival(const SmoothCallCurve& curve);

// The measure of q0 itself: survival is the right-continuous step function
// with the nu0 levels, no density.
ImpliedMeasure step_measure(const EfficientCurve& eff);

// beta + int_t^upper nu(x > z) dz
double reconstruct_price(const ImpliedMeasure& measure, double t);

struct RiskReport {
    std::vector<double> levels;
    std::vector<double> quantile;
    std::vector<double> var;
    std::vector<double> cvar;
    double position_price = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double window_mass = 0.0;
};

// VaR and CVaR of a long position worth position_price under the measure
// conditioned on the window (lo, hi], by default (j_1, j_I].
RiskReport var_cvar(const ImpliedMeasure& measure, double position_price, const std::vector<double>& levels,
                    std::optional<std::pair<double, double>> window = std::nullopt);

} // namespace npcall
