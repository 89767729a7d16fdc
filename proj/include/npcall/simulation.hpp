#pragma once

#include "npcall/quotes.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace npcall {

// Black-Scholes economy whose volatility falls linearly in strike.
struct SmileModel {
    double spot = 1365.0;
    double rate = 0.04;
    double tau = 0.25;
    double first_strike = 1000.0;
    double strike_step = 28.0;
    int strike_count = 25;
    double vol_at_first = 0.40;
    double vol_drop = 0.20;
    double vol_span = 700.0;

    std::vector<double> strikes() const;
    double vol(double k) const;
    double vol_slope() const { return -vol_drop / vol_span; }
    // True CALL price, survival -dC/dk and density d2C/dk2 along the smile.
    double price(double k) const;
    double survival(double k) const;
    double density(double k) const;
};

// Uniform ask noise whose half-width grows with distance from the forward and
// with the bid-ask spread of the option.
struct NoiseModel {
    double spread_rate = 0.05;
    double spread_floor = 0.50;
    double spread_cap = 3.00;
    double illiquidity_slope = 5.0;
    double radius_scale = 1.0;
    double ask_floor = 0.01;

    double illiquidity(const SmileModel& m, double k) const;
    double spread(double price) const;
    double radius(const SmileModel& m, double k) const;
};

// Deterministic in (seed, sim): each (sim, strike) pair has its own stream.
double uniform_draw(std::uint64_t seed, std::uint64_t sim, std::uint64_t strike);

// Asks F(k) + eps_k floored at ask_floor, plus the underlying at strike 0.
QuoteCurve simulate_curve(const SmileModel& model, const NoiseModel& noise, std::uint64_t seed,
                          std::uint64_t sim = 0);

struct MCParams {
    std::vector<int> N{10};
    std::vector<double> delta{5.0};
    int sims = 5000;
    std::uint64_t seed = 42;
    unsigned threads = 0; // 0: hardware concurrency
    std::string smoother = "spline"; // or a kernel id
    std::array<double, 4> moneyness_edges = kDefaultMoneynessEdges;
    bool density = true;
    double density_lo = 1100.0;
    double density_hi = 1600.0;
    double density_step = 1.0;
};

struct Summary {
    double mean = 0.0, sd = 0.0, min = 0.0, max = 0.0;
    double q025 = 0.0, q05 = 0.0, q95 = 0.0, q975 = 0.0;
    int count = 0; // finite samples
};

Summary summarize(std::vector<double> values);

struct CaseReport {
    int N = 0;
    double delta = 0.0;
    double h = 0.0;
    // Mean squared error over sims x strikes, and over the strikes above the
    // lowest one only.
    double mse = 0.0;
    double mse_compat = 0.0;
    std::vector<Summary> price, vol, survival; // per strike
    int vol_failures = 0;
    // Fraction of strikes whose true price lies below / above the 90% and 95%
    // bands of the simulated prices.
    double below_90 = 0.0, above_90 = 0.0, below_95 = 0.0, above_95 = 0.0;
    std::array<double, 5> bucket_bias{}; // mean(q - F) per moneyness class
    std::vector<double> density_x, density_mean, density_true;
    double mise = 0.0;
};

struct MCReport {
    SmileModel model;
    NoiseModel noise;
    MCParams params;
    std::vector<double> strikes;
    std::vector<double> true_price, true_vol, true_survival;
    std::vector<Moneyness> bucket;
    std::array<int, 5> bucket_count{};
    // Inefficiency rates in percent of the positive strikes.
    double ineff_mean = 0.0, ineff_max = 0.0, ineff_min = 0.0;
    double share_ge_40 = 0.0, share_gt_40 = 0.0; // percent of sims
    std::array<double, 5> bucket_ineff_mean{}, bucket_ineff_max{};
    std::vector<CaseReport> cases;
};

MCReport run_mc(const SmileModel& model, const NoiseModel& noise, const MCParams& params);

// Strike-step refinement at fixed delta: sup and mean over an interior grid of
// the empirical MSE of q^h against the true price.
struct ConvergenceParams {
    std::vector<double> steps{28.0, 14.0, 7.0, 3.5};
    double delta = 5.0;
    int N = 10;
    int sims = 500;
    std::uint64_t seed = 7;
    double lo = 1200.0, hi = 1500.0, eval_step = 10.0;
    double last_strike = 1672.0;
    // Noise half-width multiplied by (step / reference_step)^radius_power.
    double reference_step = 28.0;
    double radius_power = 2.0;
    unsigned threads = 0;
};

struct ConvergenceReport {
    std::vector<double> steps;
    std::vector<double> sup_mse, mean_mse;
};

ConvergenceReport convergence_study(const SmileModel& model, const NoiseModel& noise, const ConvergenceParams& params);

// Risk-neutral mixture of log-normals: ln X ~ N(ln S + (mu - s^2/2) tau, s^2 tau)
// with probabilities weight.
struct MixtureModel {
    double spot = 1365.0;
    double rate = 0.04;
    double tau = 0.25;
    std::vector<double> mu{0.027, 0.033, 0.049};
    std::vector<double> sigma{0.3, 0.1, 0.4};
    std::vector<double> weight{0.2, 0.3, 0.5};

    void validate() const;
    // e^{-r tau} E[(X - k)^+]; k = 0 gives the discounted mean.
    double price(double k) const;
    // Density of X (undiscounted).
    double density(double x) const;
};

struct MixtureParams {
    std::vector<double> strikes; // empty: 1000 + 28 i, i < 25
    double h = 20.0;
    std::string kernel = "normal";
    double lo = 1050.0, hi = 1650.0, step = 1.0;
};

struct MixtureResult {
    std::vector<double> strikes, prices;
    std::vector<double> x, estimate, truth; // both conditional on [lo, hi]
    double mise = 0.0;
};

MixtureResult mixture_experiment(const MixtureModel& model, const MixtureParams& params);

} // namespace npcall
