#include "npcall/black_scholes.hpp"

#include "npcall/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace npcall {

namespace {

struct D {
    double d1, d2, sqt;
};

D dd(double spot, double strike, double rate, double tau, double vol) {
    const double sqt = vol * std::sqrt(tau);
    const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * tau) / sqt;
    return {d1, d1 - sqt, sqt};
}

} // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2; }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double bs_call(double spot, double strike, double rate, double tau, double vol) {
    const double disc = std::exp(-rate * tau);
    if (strike <= 0.0)
        return spot;
    if (vol <= 0.0 || spot <= 0.0)
        return std::max(spot - strike * disc, 0.0);
    const auto [d1, d2, sqt] = dd(spot, strike, rate, tau, vol);
    return spot * norm_cdf(d1) - strike * disc * norm_cdf(d2);
}

double bs_survival(double spot, double strike, double rate, double tau, double vol) {
    const double disc = std::exp(-rate * tau);
    if (strike <= 0.0)
        return disc;
    if (vol <= 0.0)
        return spot * std::exp(rate * tau) > strike ? disc : 0.0;
    return disc * norm_cdf(dd(spot, strike, rate, tau, vol).d2);
}

double bs_density(double spot, double x, double rate, double tau, double vol) {
    if (x <= 0.0 || vol <= 0.0)
        return 0.0;
    const auto [d1, d2, sqt] = dd(spot, x, rate, tau, vol);
    return std::exp(-rate * tau) * norm_pdf(d2) / (x * sqt);
}

double bs_vega(double spot, double strike, double rate, double tau, double vol) {
    if (strike <= 0.0 || vol <= 0.0)
        return 0.0;
    return spot * norm_pdf(dd(spot, strike, rate, tau, vol).d1) * std::sqrt(tau);
}

double implied_vol(double price, double spot, double strike, double rate, double tau) {
    const double lower = std::max(spot - strike * std::exp(-rate * tau), 0.0);
    if (!(price > lower) || !(price < spot) || !(tau > 0.0))
        throw NoSolutionError("price " + std::to_string(price) + " outside the no-arbitrage bounds (" +
                              std::to_string(lower) + ", " + std::to_string(spot) + ")");

    double lo = 0.0, hi = 1.0;
    while (bs_call(spot, strike, rate, tau, hi) < price) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6)
            throw NoSolutionError("implied volatility above 1e6");
    }
    // Newton inside the bracket, bisection when Newton leaves it or stalls.
    double v = 0.5 * (lo + hi);
    for (int it = 0; it < 300; ++it) {
        const double f = bs_call(spot, strike, rate, tau, v) - price;
        if (f > 0.0)
            hi = v;
        else
            lo = v;
        const double vega = bs_vega(spot, strike, rate, tau, v);
        double next = vega > 0.0 ? v - f / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - v) < 1e-13 || hi - lo < 1e-13)
            return next;
        v = next;
    }
    return v;
}

double smile_survival(double spot, double strike, double rate, double tau, double vol, double dvol) {
    return bs_survival(spot, strike, rate, tau, vol) - bs_vega(spot, strike, rate, tau, vol) * dvol;
}

double smile_density(double spot, double strike, double rate, double tau, double vol, double dvol) {
    // C_KK + 2 C_Ks s' + C_ss s'^2 with s'' = 0
    const auto [d1, d2, sqt] = dd(spot, strike, rate, tau, vol);
    const double disc = std::exp(-rate * tau);
    const double c_kk = disc * norm_pdf(d2) / (strike * sqt);
    const double c_ks = disc * norm_pdf(d2) * d1 / vol;
    const double vega = spot * norm_pdf(d1) * std::sqrt(tau);
    const double c_ss = vega * d1 * d2 / vol;
    return c_kk + 2.0 * c_ks * dvol + c_ss * dvol * dvol;
}

} // namespace npcall
