#include "catch_amalgamated.hpp"

#include "npcall/black_scholes.hpp"
#include "npcall/error.hpp"

#include <cmath>
#include <random>

using namespace npcall;

TEST_CASE("normal distribution") {
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(norm_cdf(1.959963984540054) == Catch::Approx(0.975).epsilon(1e-14));
    CHECK(norm_cdf(-40.0) >= 0.0);
    CHECK(norm_pdf(0.0) == Catch::Approx(0.3989422804014327).epsilon(1e-15));
}

TEST_CASE("call price limits") {
    const double S = 1365.0, r = 0.04, t = 0.25;
    CHECK(bs_call(S, 0.0, r, t, 0.3) == S);
    for (double k : {800.0, 1300.0, 1365.0, 1500.0}) {
        CHECK(bs_call(S, k, r, t, 0.0) == Catch::Approx(std::max(S - k * std::exp(-r * t), 0.0)).margin(1e-12));
        CHECK(bs_call(S, k, r, t, 1e-9) == Catch::Approx(std::max(S - k * std::exp(-r * t), 0.0)).margin(1e-6));
        CHECK(bs_call(S, k, r, t, 50.0) == Catch::Approx(S).epsilon(1e-6));
    }
    // Put-call parity through a put priced by its own formula.
    const double k = 1400.0, v = 0.25;
    const double d1 = (std::log(S / k) + (r + 0.5 * v * v) * t) / (v * std::sqrt(t));
    const double put = k * std::exp(-r * t) * norm_cdf(-(d1 - v * std::sqrt(t))) - S * norm_cdf(-d1);
    CHECK(bs_call(S, k, r, t, v) - put == Catch::Approx(S - k * std::exp(-r * t)).epsilon(1e-12));
}

TEST_CASE("prices at the ends of the simulation grid") {
    const double S = 1365.0, r = 0.04, t = 0.25;
    CHECK(std::abs(bs_call(S, 1000.0, r, t, 0.40) - 378.0) < 0.01 * 378.0);
    CHECK(std::abs(bs_call(S, 1700.0, r, t, 0.20) - 0.9) < 0.15);
}

TEST_CASE("implied volatility") {
    const double S = 1365.0, r = 0.04, t = 0.25;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double k = 900.0 + 900.0 * u(rng), v = 0.05 + 0.8 * u(rng);
        const double p = bs_call(S, k, r, t, v);
        if (p - std::max(S - k * std::exp(-r * t), 0.0) < 1e-8)
            continue;
        CHECK(implied_vol(p, S, k, r, t) == Catch::Approx(v).margin(1e-9));
    }
    CHECK(implied_vol(bs_call(S, 1300.0, r, t, 0.3), S, 1300.0, r, t) == Catch::Approx(0.3).margin(1e-9));

    const double lower = S - 1000.0 * std::exp(-r * t);
    // At the forward the lower bound is 0 and the price is nearly linear in vol.
    const double fwd = S * std::exp(r * t);
    CHECK(implied_vol(1e-12, S, fwd, r, t) < 1e-12);
    const double v_low = implied_vol(lower + 1e-9, S, 1000.0, r, t);
    CHECK(v_low < 0.15);
    CHECK(bs_call(S, 1000.0, r, t, v_low) - lower == Catch::Approx(1e-9).margin(1e-12));

    double prev = 0.0;
    for (double p = 1.0; p < 300.0; p += 7.0) {
        const double v = implied_vol(p, S, 1500.0, r, t);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(implied_vol(lower - 1.0, S, 1000.0, r, t), NoSolutionError);
    CHECK_THROWS_AS(implied_vol(S, S, 1000.0, r, t), NoSolutionError);
    CHECK_THROWS_AS(implied_vol(0.0, S, 1600.0, r, t), NoSolutionError);
}

TEST_CASE("survival, density and vega against finite differences") {
    const double S = 1365.0, r = 0.04, t = 0.25, v = 0.27;
    for (double k = 900.0; k <= 1800.0; k += 37.0) {
        const double e = 1e-3;
        CHECK(bs_survival(S, k, r, t, v) ==
              Catch::Approx((bs_call(S, k - e, r, t, v) - bs_call(S, k + e, r, t, v)) / (2 * e)).margin(1e-7));
        CHECK(bs_density(S, k, r, t, v) ==
              Catch::Approx((bs_survival(S, k - e, r, t, v) - bs_survival(S, k + e, r, t, v)) / (2 * e)).margin(1e-9));
        const double ev = 1e-6;
        CHECK(bs_vega(S, k, r, t, v) ==
              Catch::Approx((bs_call(S, k, r, t, v + ev) - bs_call(S, k, r, t, v - ev)) / (2 * ev)).epsilon(1e-6));
    }
}

TEST_CASE("derivatives along a smile") {
    const double S = 1365.0, r = 0.04, t = 0.25;
    auto vol = [](double k) { return 0.4 - 0.2 * (k - 1000.0) / 700.0; };
    const double dv = -0.2 / 700.0;
    auto C = [&](double k) { return bs_call(S, k, r, t, vol(k)); };
    for (double k = 1000.0; k <= 1700.0; k += 28.0) {
        const double e = 1e-2;
        const double surv = smile_survival(S, k, r, t, vol(k), dv);
        CHECK(surv == Catch::Approx((C(k - e) - C(k + e)) / (2 * e)).margin(1e-7));
        const double dens = smile_density(S, k, r, t, vol(k), dv);
        CHECK(dens == Catch::Approx((C(k - e) - 2 * C(k) + C(k + e)) / (e * e)).margin(1e-6));
        CHECK(dens > 0.0);
    }
}
