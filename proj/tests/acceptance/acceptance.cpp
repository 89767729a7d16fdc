// One line per acceptance criterion: PASS or FAIL, then the measured values.
// Exit status is non-zero when any criterion fails.

#include "cli.hpp"
#include "npcall/efficient_set.hpp"
#include "npcall/implied_measure.hpp"
#include "npcall/simulation.hpp"
#include "npcall/smoothers.hpp"
#include "npcall/superhedge.hpp"
#include "support/random_curves.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace npcall;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Published MSE per (N, delta) for the smile study.
const std::map<std::pair<int, double>, double> kTargetMse{
    {{4, 1.0}, 1.93}, {{6, 1.0}, 1.99}, {{8, 1.0}, 2.02}, {{10, 1.0}, 2.03},
    {{4, 2.0}, 1.78}, {{6, 2.0}, 1.87}, {{8, 2.0}, 1.92}, {{10, 2.0}, 1.95},
    {{4, 5.0}, 1.61}, {{6, 5.0}, 1.63}, {{8, 5.0}, 1.72}, {{10, 5.0}, 1.76},
    {{4, 10.0}, 6.17}, {{6, 10.0}, 2.06}, {{8, 10.0}, 1.61}, {{10, 10.0}, 1.58},
};

const CaseReport& find_case(const MCReport& r, int N, double delta) {
    for (const auto& c : r.cases)
        if (c.N == N && c.delta == delta)
            return c;
    throw std::runtime_error("missing case");
}

void mse_grid(const MCReport& r) {
    bool ok = true;
    std::string detail;
    double worst = 0.0;
    for (const auto& [key, target] : kTargetMse) {
        const auto& c = find_case(r, key.first, key.second);
        const double e = rel(c.mse, target);
        worst = std::max(worst, e);
        ok = ok && e <= 0.15;
        detail += fmt("(%d,%g) %.3f/%.3f [compat %.3f] ", key.first, key.second, c.mse, target, c.mse_compat);
    }
    report(1, "MSE grid within 15%", ok, fmt("worst relative error %.1f%%; ", 100.0 * worst) + detail);
}

void inefficiency(const MCReport& r) {
    const bool ok = std::abs(r.ineff_mean - 34.74) <= 2.0 && r.ineff_max <= 60.0 && std::abs(r.share_ge_40 - 20.0) <= 5.0;
    report(2, "inefficiency rates", ok,
           fmt("mean %.2f%% (34.74 +- 2), max %.0f%% (<= 60), share of sims at or above 40%% %.1f%% (20 +- 5); "
               "strictly above 40%% %.1f%%",
               r.ineff_mean, r.ineff_max, r.share_ge_40, r.share_gt_40));
}

void mixture() {
    const double target = 3.34864e-6;
    const auto grid = mixture_experiment(MixtureModel{}, MixtureParams{});
    MixtureParams linear;
    for (int i = 0; i < 25; ++i)
        linear.strikes.push_back(1000.0 + 700.0 * i / 24.0);
    const auto lin = mixture_experiment(MixtureModel{}, linear);
    report(3, "mixture density MISE within 20%", rel(grid.mise, target) <= 0.20,
           fmt("MISE %.4e vs %.5e (ratio %.2f) on strikes 1000 + 28i; %.4e on 25 strikes spanning [1000, 1700]",
               grid.mise, target, grid.mise / target, lin.mise));
}

void density_mise(const MCReport& r) {
    const double t5 = 4.402242e-7, t10 = 4.318549e-7;
    const double m5 = find_case(r, 10, 5.0).mise, m10 = find_case(r, 10, 10.0).mise;
    auto within = [](double a, double b) { return a <= 3.0 * b && a >= b / 3.0; };
    report(4, "average density MISE within a factor 3", within(m5, t5) && within(m10, t10),
           fmt("delta 5: %.3e vs %.3e; delta 10: %.3e vs %.3e", m5, t5, m10, t10));
}

void coverage(const MCReport& r) {
    const auto& c5 = find_case(r, 10, 5.0);
    const auto& c10 = find_case(r, 10, 10.0);
    const bool inside5 = c5.below_90 == 0.0 && c5.above_90 == 0.0;
    const bool breach10 = std::abs(100.0 * c10.below_90 - 21.7) <= 5.0;
    report(5, "90% band coverage", inside5 && breach10,
           fmt("delta 5: %.0f%% of strikes below / %.0f%% above the 90%% band (want 0); delta 10: lower 90%% band "
               "breached at %.1f%% of strikes (21.7 +- 5), lower 95%% band at %.1f%%",
               100.0 * c5.below_90, 100.0 * c5.above_90, 100.0 * c10.below_90, 100.0 * c10.below_95));
}

void oracle_equivalence() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto ref = fit_reference_spline();
    double worst_lp = 0.0, worst_wb = 0.0;
    int n = 0;
    while (n < 1000) {
        const auto curve = testutil::random_curve(rng, 2 + static_cast<int>(rng() % 14));
        const auto eff = efficient_set(curve);
        if (eff.size() - 1 > 15)
            continue;
        const double top = eff.strikes().back();
        std::vector<double> ks, ws;
        const int m = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < m; ++i) {
            ks.push_back(1.2 * top * u(rng));
            ws.push_back(0.1 + 2.0 * u(rng));
        }
        // h < k keeps the spline at 0 at the origin.
        const auto f = n % 2 == 0 ? call_portfolio(ks, ws) : spline_payoff(ref, ks[0], (0.05 + 0.9 * u(rng)) * ks[0]);
        const auto sh = superhedge_price(f, eff);
        const double lp = lp_oracle(f, curve.strikes(), curve.asks());
        worst_lp = std::max(worst_lp, rel(sh.price, lp));
        worst_wb = std::max(worst_wb, rel(sh.price, sh.price_dual));
        ++n;
    }
    report(6, "closed form vs LP on 1000 instances", worst_lp <= 1e-7 && worst_wb <= 1e-9,
           fmt("max relative gap to LP %.2e (<= 1e-7), w-side vs b-side %.2e (<= 1e-9)", worst_lp, worst_wb));
}

void spline_family() {
    const auto ref = fit_reference_spline();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto call = [](double x, double k) { return std::max(x - k, 0.0); };

    double trans = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double k = 50.0 + 100.0 * u(rng), m = 60.0 * u(rng), h = 1.0 + 20.0 * u(rng);
        const double x = k - 2.0 * h + 4.0 * h * u(rng);
        trans = std::max(trans, std::abs(spline_payoff(ref, k + m, h)(x + m) - spline_payoff(ref, k, h)(x)));
    }

    bool mono = true;
    for (double h : {0.5, 2.0, 5.0, 10.0, 20.0}) {
        const auto lo = spline_payoff(ref, 100.0, h), hi = spline_payoff(ref, 100.0, 1.5 * h);
        for (int i = 0; i <= 10000; ++i) {
            const double x = 60.0 + 0.008 * i;
            mono = mono && call(x, 100.0) <= lo(x) + 1e-12 && lo(x) <= hi(x) + 1e-12;
        }
    }

    double gap = 0.0;
    const double unit = ref.value(ref.k()) / ref.h();
    for (double h : {0.3, 1.0, 7.0, 25.0, 90.0}) {
        const auto g = spline_payoff(ref, 300.0, h);
        const auto direct = SplinePayoff::fit(300.0, h);
        double sup = 0.0;
        for (int i = 0; i <= 20000; ++i) {
            const double x = 300.0 - h + 2.0 * h * i / 20000.0;
            sup = std::max(sup, g(x) - call(x, 300.0));
        }
        gap = std::max({gap, rel(sup, unit * h), rel(g(300.0), unit * h), rel(direct.value(300.0), unit * h)});
    }

    double sym = 0.0;
    const auto g = spline_payoff(ref, 100.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = 15.0 * u(rng);
        sym = std::max(sym, std::abs(g(100.0 + t) - g(100.0 - t) - t));
    }

    int cdom_bad = 0;
    for (int i = 0; i < 1000; ++i) {
        const double h = 1.0 + 20.0 * u(rng), a = u(rng), s = 200.0 * u(rng), v = 200.0 * u(rng);
        const double t = a * s + (1.0 - a) * v + 20.0 * u(rng);
        const auto gs = spline_payoff(ref, s, h), gv = spline_payoff(ref, v, h), gt = spline_payoff(ref, t, h);
        for (int j = 0; j <= 100; ++j) {
            const double x = 250.0 * j / 100.0;
            if (a * gs(x) + (1.0 - a) * gv(x) < gt(x) - 1e-10) {
                ++cdom_bad;
                break;
            }
        }
    }

    const bool ok = trans <= 1e-12 && mono && gap <= 1e-6 && sym <= 1e-12 && cdom_bad == 0;
    report(7, "smoothed payoff family properties", ok,
           fmt("translation %.1e, monotone in h %s, sup gap vs linear law %.1e (<= 1e-6), symmetry %.1e, "
               "domination failures %d of 1000",
               trans, mono ? "yes" : "no", gap, sym, cdom_bad));
}

void closure() {
    std::mt19937_64 rng(99);
    const Smoother sp = Smoother::spline(10), nk = Smoother::kernel();
    double worst = 0.0;
    std::vector<EfficientCurve> curves{efficient_set(simulate_curve(SmileModel{}, NoiseModel{}, 42, 0))};
    while (curves.size() < 20) {
        auto eff = efficient_set(testutil::random_curve(rng, 5 + static_cast<int>(rng() % 20)));
        if (eff.size() >= 3)
            curves.push_back(std::move(eff));
    }
    for (const auto& eff : curves)
        for (const Smoother* sm : {&sp, &nk}) {
            const SmoothCallCurve c(eff, *sm, 0.3 * eff.strikes()[1] + 5.0);
            const auto m = implied_survival(c);
            const double q0 = eff.prices()[0];
            for (int i = 0; i < 100; ++i) {
                const double t = m.upper() * i / 99.0;
                worst = std::max(worst, std::abs(reconstruct_price(m, t) - c.price(t)) / q0);
            }
        }
    report(8, "prices rebuilt from the implied survival", worst <= 1e-6,
           fmt("max |rebuilt - q| / q(0) = %.2e over 20 curves x 2 smoothers x 100 points", worst));
}

void convergence() {
    const auto r = convergence_study(SmileModel{}, NoiseModel{}, ConvergenceParams{});
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        if (i > 0)
            ok = ok && r.sup_mse[i] <= r.sup_mse[i - 1];
        detail += fmt("step %g: sup %.3e mean %.3e; ", r.steps[i], r.sup_mse[i], r.mean_mse[i]);
    }
    report(9, "strike-step refinement lowers the interior sup MSE", ok, detail);
}

void risk_pipeline() {
    auto surv = [](double t) { return std::clamp((1700.0 - t) / 700.0, 0.0, 1.0); };
    auto dens = [](double x) { return x > 1000.0 && x < 1700.0 ? 1.0 / 700.0 : 0.0; };
    const ImpliedMeasure m(0.0, surv, dens, 1000.0, 1700.0, 1700.0, {1000.0, 1700.0}, 1.0);
    const auto r = var_cvar(m, 1400.0, {0.05});
    const double lib = std::max({std::abs(r.quantile[0] - 1035.0), std::abs(r.var[0] - 365.0),
                                 std::abs(r.cvar[0] - 382.5)});

    // Quotes with constant second differences: a normal smoother puts uniform
    // mass on [1000, 1700].
    const auto path = std::filesystem::temp_directory_path() / "npcall_acceptance_quotes.csv";
    {
        std::ofstream f(path);
        f.precision(17);
        f << "strike,ask,ask_size,maturity,observed_at\n";
        for (int k = 0; k <= 3000; k += 10)
            f << k << ',' << 1e-4 * (3000.0 - k) * (3000.0 - k) + 1.0 << ",500,2007-03-16,2007-02-01T10:00\n";
    }
    std::ostringstream out, err;
    const int code = cli::run({"risk", "-i", path.string(), "--smoother", "normal", "--h", "20", "--window",
                               "1000,1700", "--position-price", "1400", "--levels", "0.05"},
                              out, err);
    double cli_err = INFINITY;
    if (code == 0) {
        const auto j = nlohmann::json::parse(out.str());
        cli_err = std::max({std::abs(j["quantile"][0].get<double>() - 1035.0),
                            std::abs(j["var"][0].get<double>() - 365.0), std::abs(j["cvar"][0].get<double>() - 382.5)});
    }
    report(10, "VaR/CVaR on the uniform example", lib <= 1e-9 && cli_err <= 1e-9,
           fmt("library max error %.1e, CSV -> risk report max error %.1e (exit %d); Q 1035, VaR 365, CVaR 382.5",
               lib, cli_err, code));
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();

    MCParams p;
    p.sims = 5000;
    p.seed = 42;
    p.N = {4, 6, 8, 10};
    p.delta = {1.0, 2.0, 5.0, 10.0};
    const auto mc = run_mc(SmileModel{}, NoiseModel{}, p);

    mse_grid(mc);
    inefficiency(mc);
    mixture();
    density_mise(mc);
    coverage(mc);
    oracle_equivalence();
    spline_family();
    closure();
    convergence();
    risk_pipeline();

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of 10 criteria failed (%.1f s)\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
