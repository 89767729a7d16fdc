#include "catch_amalgamated.hpp"

#include "npcall/efficient_set.hpp"
#include "npcall/error.hpp"
#include "npcall/superhedge.hpp"
#include "support/random_curves.hpp"

#include <cmath>
#include <random>

using namespace npcall;

namespace {

// Dykstra's alternating projections onto the half-spaces describing
// {v convex in strike} n {v non-increasing} n {v <= q}. The largest element of
// that set is also its point nearest to q, so the limit is the superhedging
// curve at the quoted strikes.
std::vector<double> dykstra(std::span<const double> k, std::span<const double> q, int max_sweeps = 400000) {
    const std::size_t n = k.size();
    struct Half {
        std::vector<std::pair<std::size_t, double>> a; // sparse row
        double b;
        double norm2;
    };
    std::vector<Half> hs;
    auto add = [&](std::vector<std::pair<std::size_t, double>> a, double b) {
        double n2 = 0.0;
        for (auto& [i, v] : a)
            n2 += v * v;
        hs.push_back({std::move(a), b, n2});
    };
    for (std::size_t i = 0; i + 2 < n; ++i) {
        // slope(i, i+1) - slope(i+1, i+2) <= 0
        const double d0 = k[i + 1] - k[i], d1 = k[i + 2] - k[i + 1];
        add({{i, -1.0 / d0}, {i + 1, 1.0 / d0 + 1.0 / d1}, {i + 2, -1.0 / d1}}, 0.0);
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        add({{i + 1, 1.0}, {i, -1.0}}, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        add({{i, 1.0}}, q[i]);

    std::vector<double> x(q.begin(), q.end());
    std::vector<std::vector<double>> p(hs.size(), std::vector<double>(n, 0.0));
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (std::size_t h = 0; h < hs.size(); ++h) {
            auto& ph = p[h];
            std::vector<double> y(n);
            for (std::size_t i = 0; i < n; ++i)
                y[i] = x[i] + ph[i];
            double ay = 0.0;
            for (auto& [i, v] : hs[h].a)
                ay += v * y[i];
            const double viol = std::max(ay - hs[h].b, 0.0) / hs[h].norm2;
            std::vector<double> nx = y;
            for (auto& [i, v] : hs[h].a)
                nx[i] -= viol * v;
            for (std::size_t i = 0; i < n; ++i) {
                ph[i] = y[i] - nx[i];
                change = std::max(change, std::abs(nx[i] - x[i]));
            }
            x = std::move(nx);
        }
        if (change < 1e-14)
            break;
    }
    return x;
}

} // namespace

TEST_CASE("all points efficient when the asks are convex and decreasing") {
    const QuoteCurve c({0, 100, 110, 120}, {100, 12, 9, 8});
    const auto e = efficient_set(c);
    REQUIRE(e.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(lp_oracle(call_payoff(c.strikes()[i]), e) == Catch::Approx(c.asks()[i]).epsilon(1e-12));
    CHECK(e.slope(0) == Catch::Approx(-0.88));
    CHECK(e.slope(1) == Catch::Approx(-0.3));
    CHECK(e.slope(2) == Catch::Approx(-0.1));
}

TEST_CASE("an ask above the chord is inefficient") {
    const QuoteCurve c({0, 100, 110, 120}, {100, 12, 11, 8});
    const auto e = efficient_set(c);
    REQUIRE(e.size() == 3);
    CHECK(e.strikes()[1] == 100.0);
    CHECK(e.strikes()[2] == 120.0);
    CHECK(q0_at(e, 110.0) == Catch::Approx(10.0));
    CHECK(lp_oracle(call_payoff(110.0), c.strikes(), c.asks()) == Catch::Approx(10.0).epsilon(1e-12));
    CHECK(e.efficiency_flags() == std::vector<bool>{true, true, false, true});
}

TEST_CASE("two decreasing points are both efficient") {
    const QuoteCurve c({0, 50}, {60, 20});
    const auto e = efficient_set(c);
    CHECK(e.size() == 2);
}

TEST_CASE("points on a chord are kept") {
    const QuoteCurve c({0, 100, 110, 120}, {100, 12, 10, 8});
    CHECK(efficient_set(c).size() == 4);
}

TEST_CASE("increasing tail is cut at the first rise") {
    const QuoteCurve c({0, 100, 110, 120}, {100, 12, 9, 9.5});
    const auto e = efficient_set(c);
    REQUIRE(e.size() == 3);
    CHECK(e.strikes().back() == 110.0);
    CHECK(q0_at(e, 120.0) == 9.0);
}

TEST_CASE("underlying alone is rejected") {
    const QuoteCurve c({0}, {100});
    CHECK_THROWS_AS(efficient_set(c), InsufficientStrikesError);
}

TEST_CASE("q0 interpolation") {
    const EfficientCurve e({0, 100, 120}, {100, 12, 8});
    CHECK(q0_at(e, 110.0) == Catch::Approx(10.0));
    CHECK(q0_at(e, 100.0) == 12.0);
    CHECK(q0_at(e, 0.0) == 100.0);
    CHECK(q0_at(e, 170.0) == 8.0);
    CHECK_THROWS_AS(EfficientCurve({0, 100, 120}, {100, 12, 13}), InvalidCurveError);
    CHECK_THROWS_AS(EfficientCurve({0, 100, 110, 120}, {100, 12, 11, 8}), InvalidCurveError);
}

TEST_CASE("step levels") {
    const EfficientCurve e({0, 100, 110, 120}, {100, 12, 9, 8});
    const auto lv = nu0(e);
    REQUIRE(lv.size() == 4);
    CHECK(lv[1].lo == 100.0);
    CHECK(lv[1].hi == 110.0);
    CHECK(lv[1].level == Catch::Approx(0.3));
    CHECK(nu0_at(e, 105.0) == Catch::Approx(0.3));
    CHECK(nu0_at(e, 110.0) == Catch::Approx(0.3));
    CHECK(nu0_at(e, 110.5) == Catch::Approx(0.1));
    CHECK(nu0_at(e, 500.0) == 0.0);

    const EfficientCurve col({0, 100, 110, 120}, {100, 12, 10, 8});
    CHECK(nu0_at(col, 105.0) == Catch::Approx(nu0_at(col, 115.0)));
}

TEST_CASE("random curves: idempotence, dominance, oracle and Dykstra agreement") {
    std::mt19937_64 rng(20240215);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 12);
        const auto c = testutil::random_curve(rng, n);
        const auto e = efficient_set(c);

        const auto again = efficient_set(e.as_quote_curve());
        REQUIRE(again.size() == e.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            CHECK(again.strikes()[i] == e.strikes()[i]);
            CHECK(again.prices()[i] == e.prices()[i]);
        }

        const auto flags = e.efficiency_flags();
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double k = c.strikes()[i];
            const double v = q0_at(e, k);
            CHECK(v <= c.asks()[i] + 1e-12);
            if (flags[i])
                CHECK(v == c.asks()[i]);
            else
                CHECK(v < c.asks()[i]);
            CHECK(std::abs(v - lp_oracle(call_payoff(k), c.strikes(), c.asks())) <= 1e-9);
        }

        const auto lv = nu0(e);
        for (std::size_t i = 0; i < lv.size(); ++i) {
            CHECK(lv[i].level >= 0.0);
            if (i > 0)
                CHECK(lv[i].level <= lv[i - 1].level + 1e-15);
        }

        if (trial < 40) {
            const auto ref = dykstra(c.strikes(), c.asks());
            for (std::size_t i = 0; i < c.size(); ++i)
                CHECK(std::abs(ref[i] - q0_at(e, c.strikes()[i])) <= 1e-7);
        }
    }
}
