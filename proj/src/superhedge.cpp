#include "npcall/superhedge.hpp"

#include "npcall/error.hpp"
#include "npcall/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace npcall {

namespace {

constexpr double kNegTol = 1e-12;

} // namespace

ConvexPayoff::ConvexPayoff(Fn value, Fn deriv, Fn second_deriv, double asymptotic_slope, std::string label)
    : value_(std::move(value)), deriv_(std::move(deriv)), second_(std::move(second_deriv)),
      slope_(asymptotic_slope), label_(std::move(label)) {
    if (!(asymptotic_slope >= 0.0) || !std::isfinite(asymptotic_slope))
        throw NotInGammaError("asymptotic slope must be finite and non-negative");
}

ConvexPayoff call_payoff(double k) {
    return ConvexPayoff([k](double x) { return std::max(x - k, 0.0); },
                        [k](double x) { return x > k ? 1.0 : 0.0; },
                        [](double) { return 0.0; }, 1.0, "option:" + std::to_string(k));
}

ConvexPayoff call_portfolio(std::vector<double> strikes, std::vector<double> weights) {
    if (strikes.size() != weights.size())
        throw NotInGammaError("portfolio strikes and weights differ in length");
    for (double w : weights)
        if (w < 0.0)
            throw NotInGammaError("portfolio weights must be non-negative");
    const double slope = std::accumulate(weights.begin(), weights.end(), 0.0);
    auto value = [strikes, weights](double x) {
        double v = 0.0;
        for (std::size_t n = 0; n < strikes.size(); ++n)
            v += weights[n] * std::max(x - strikes[n], 0.0);
        return v;
    };
    auto deriv = [strikes, weights](double x) {
        double v = 0.0;
        for (std::size_t n = 0; n < strikes.size(); ++n)
            if (x > strikes[n])
                v += weights[n];
        return v;
    };
    return ConvexPayoff(value, deriv, [](double) { return 0.0; }, slope, "portfolio");
}

ConvexPayoff zero_payoff() {
    auto zero = [](double) { return 0.0; };
    return ConvexPayoff(zero, zero, zero, 0.0, "zero");
}

std::vector<double> dual_coefficients(const EfficientCurve& eff) {
    const std::size_t I = eff.last();
    std::vector<double> b(I + 1);
    // b_{i+1} = D_{i+1}(q) - D_i(q), with D_I(q) = 0
    for (std::size_t i = 0; i < I; ++i) {
        const double next = (i + 1 < I) ? eff.slope(i + 1) : 0.0;
        double v = next - eff.slope(i);
        if (v < -kNegTol)
            throw InconsistentCurveError("negative dual coefficient b_" + std::to_string(i + 1) +
                                         "; efficient curve is not convex/decreasing");
        b[i] = std::max(v, 0.0);
    }
    b[I] = eff.prices()[I];
    return b;
}

SuperhedgeResult superhedge_price(const ConvexPayoff& f, const EfficientCurve& eff) {
    const auto j = eff.strikes();
    const auto q = eff.prices();
    const std::size_t I = eff.last();

    std::vector<double> fv(I + 1);
    for (std::size_t i = 0; i <= I; ++i)
        fv[i] = f(j[i]);
    if (std::abs(fv[0]) > kNegTol * (1.0 + std::abs(fv[I])))
        throw NotInGammaError("payoff is not 0 at the origin");

    SuperhedgeResult res;
    res.w.resize(I + 1);
    double prev = 0.0; // D_{-1}(f)
    for (std::size_t i = 0; i <= I; ++i) {
        const double d = (i < I) ? (fv[i + 1] - fv[i]) / (j[i + 1] - j[i]) : f.asymptotic_slope();
        double w = d - prev;
        if (w < -kNegTol) {
            if (i == I)
                throw NotInGammaError("asymptotic slope below the last chord slope of the payoff");
            throw InconsistentCurveError("negative weight w_" + std::to_string(i) + " at strike " +
                                         std::to_string(j[i]));
        }
        res.w[i] = std::max(w, 0.0);
        prev = d;
    }
    res.b = dual_coefficients(eff);

    res.price = 0.0;
    for (std::size_t i = 0; i <= I; ++i)
        res.price += res.w[i] * q[i];
    res.price_dual = res.b[I] * f.asymptotic_slope();
    for (std::size_t i = 1; i <= I; ++i)
        res.price_dual += res.b[i - 1] * fv[i];
    return res;
}

double lp_oracle(const ConvexPayoff& f, std::span<const double> strikes, std::span<const double> prices) {
    const std::size_t n = strikes.size();
    if (n < 2 || strikes.front() != 0.0 || prices.size() != n)
        throw InvalidCurveError("LP oracle needs strikes starting at 0 with matching prices");

    // Primal: min q'a, a >= 0, sum_i a_i (j_m - j_i)^+ >= f(j_m) (m >= 1), sum_i a_i >= slope.
    // Solved through its dual, whose origin is feasible because q > 0.
    const Eigen::Index rows = static_cast<Eigen::Index>(n); // dual constraints, one per a_i
    const Eigen::Index cols = static_cast<Eigen::Index>(n); // dual variables: n-1 strikes + slope
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd c(cols), b(rows);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 1; m < n; ++m)
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m - 1)) = std::max(strikes[m] - strikes[i], 0.0);
        A(static_cast<Eigen::Index>(i), cols - 1) = 1.0;
        b[static_cast<Eigen::Index>(i)] = prices[i];
    }
    for (std::size_t m = 1; m < n; ++m)
        c[static_cast<Eigen::Index>(m - 1)] = f(strikes[m]);
    c[cols - 1] = f.asymptotic_slope();

    const auto res = lp::maximize(c, A, b);
    if (res.status == lp::Status::unbounded)
        throw InfeasibleError("no long CALL portfolio dominates the payoff");
    return res.value;
}

double lp_oracle(const ConvexPayoff& f, const EfficientCurve& eff) {
    return lp_oracle(f, eff.strikes(), eff.prices());
}

} // namespace npcall
