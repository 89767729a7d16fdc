#pragma once

namespace npcall {

double norm_pdf(double x);
double norm_cdf(double x);

// Black-Scholes CALL on a non-dividend underlying. vol = 0 and strike = 0 are
// handled as limits.
double bs_call(double spot, double strike, double rate, double tau, double vol);

// nu(x > k) = e^{-r tau} Phi(d2) = -dC/dk at fixed vol.
double bs_survival(double spot, double strike, double rate, double tau, double vol);

// e^{-r tau} times the lognormal density at x, i.e. d2C/dk2 at fixed vol.
double bs_density(double spot, double x, double rate, double tau, double vol);

double bs_vega(double spot, double strike, double rate, double tau, double vol);

// Volatility reproducing `price`, to 1e-10. Throws NoSolutionError unless
// (spot - strike e^{-r tau})^+ < price < spot.
double implied_vol(double price, double spot, double strike, double rate, double tau);

// Strike-dependent volatility vol(k) with slope dvol/dk: exact call price
// derivatives along the smile.
double smile_survival(double spot, double strike, double rate, double tau, double vol, double dvol);
double smile_density(double spot, double strike, double rate, double tau, double vol, double dvol);

} // namespace npcall
