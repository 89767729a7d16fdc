#pragma once

#include "npcall/efficient_set.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace npcall {

// A payoff in the class of convex functions on [0, inf) with f(0) = 0 and a
// finite asymptotic slope lim f(x)/x.
class ConvexPayoff {
public:
    using Fn = std::function<double(double)>;

    ConvexPayoff(Fn value, Fn deriv, Fn second_deriv, double asymptotic_slope, std::string label = {});

    double operator()(double x) const { return value_(x); }
    double value(double x) const { return value_(x); }
    double deriv(double x) const { return deriv_(x); }
    // Undefined at kinks; returns 0 there for the raw option.
    double second_deriv(double x) const { return second_(x); }
    double asymptotic_slope() const noexcept { return slope_; }
    const std::string& label() const noexcept { return label_; }

private:
    Fn value_, deriv_, second_;
    double slope_;
    std::string label_;
};

// (x - k)^+
ConvexPayoff call_payoff(double k);

// sum_n weights[n] * (x - strikes[n])^+, weights >= 0.
ConvexPayoff call_portfolio(std::vector<double> strikes, std::vector<double> weights);

ConvexPayoff zero_payoff();

struct SuperhedgeResult {
    double price = 0.0;       // sum_i w_i q(j_i)
    double price_dual = 0.0;  // sum_{i>=1} b_i f(j_i) + b_{I+1} * slope
    std::vector<double> w;    // w_0..w_I
    std::vector<double> b;    // b_1..b_{I+1}, stored at b[0]..b[I]
};

// Dual coefficients b_1..b_{I+1} of the efficient curve; they depend only on q.
std::vector<double> dual_coefficients(const EfficientCurve& eff);

// Cheapest long CALL portfolio dominating f, in closed form.
SuperhedgeResult superhedge_price(const ConvexPayoff& f, const EfficientCurve& eff);

// Same price by linear programming over the given (strike, ask) set, which must
// start at strike 0. Independent of the closed form; meant for testing.
double lp_oracle(const ConvexPayoff& f, std::span<const double> strikes, std::span<const double> prices);
double lp_oracle(const ConvexPayoff& f, const EfficientCurve& eff);

} // namespace npcall
