#include "cli.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include "npcall/black_scholes.hpp"
#include "npcall/efficient_set.hpp"
#include "npcall/error.hpp"
#include "npcall/implied_measure.hpp"
#include "npcall/quotes.hpp"
#include "npcall/simulation.hpp"
#include "npcall/smoothers.hpp"
#include "npcall/superhedge.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

namespace npcall::cli {

using nlohmann::json;

namespace {

std::string num(double x) {
    if (std::isnan(x))
        return "nan";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

double parse_number(const std::string& s, const std::string& field) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end)
        throw ConfigError(field, "not a number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        parts.push_back(item);
    return parts;
}

// Writes to the named file, or to the fallback stream when the path is empty.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback, const std::string& field) : os_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_)
                throw ConfigError(field, "cannot open '" + path + "' for writing");
            os_ = &file_;
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

struct InputOptions {
    std::string path;
    std::int64_t min_ask_size = 100;
    std::string maturity;
    std::string at;
    std::optional<double> spot;

    void attach(CLI::App* app) {
        app->add_option("--input,-i", path, "Quotes CSV (strike,ask,ask_size,maturity,observed_at)");
        app->add_option("--min-ask-size", min_ask_size, "Drop rows whose ask size is below this")
            ->capture_default_str();
        app->add_option("--maturity", maturity, "Keep rows with this maturity (YYYY-MM-DD)");
        app->add_option("--at", at, "Keep rows observed at this timestamp");
        app->add_option("--spot", spot, "Underlying ask when the file has no strike-0 row");
    }

    QuoteCurve load() const {
        if (path.empty())
            throw ConfigError("input", "an input file is required");
        std::ifstream in(path);
        if (!in)
            throw ConfigError("input", "cannot open '" + path + "'");
        if (min_ask_size < 0)
            throw ConfigError("min_ask_size", "must be non-negative");
        LoadOptions o;
        o.min_ask_size = min_ask_size;
        if (!maturity.empty())
            o.maturity = maturity;
        if (!at.empty())
            o.observed_at = at;
        o.spot = spot;
        return load_quotes(in, o);
    }
};

struct SmootherOptions {
    std::string kind = "spline";
    int N = 10;
    double delta = 5.0;
    std::optional<double> h;

    void attach(CLI::App* app) {
        app->add_option("--smoother", kind, "spline or a kernel id (normal)")->capture_default_str();
        app->add_option("--N", N, "Spline intervals")->capture_default_str();
        app->add_option("--delta", delta, "Bandwidth in units of the strike mesh")->capture_default_str();
        app->add_option("--h", h, "Explicit bandwidth; overrides --delta");
    }

    Smoother build() const {
        if (N < 2)
            throw ConfigError("N", "must be at least 2");
        if (kind == "spline")
            return Smoother::spline(N);
        return Smoother::kernel(kind);
    }

    SmoothCallCurve curve(const QuoteCurve& quotes, const EfficientCurve& eff) const {
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw ConfigError("delta", "must be positive");
        const Smoother sm = build();
        if (h) {
            if (!(*h > 0.0) || !std::isfinite(*h))
                throw ConfigError("h", "must be positive");
            return SmoothCallCurve(eff, sm, *h);
        }
        return smooth_call_curve(eff, sm, delta, mesh(quotes));
    }
};

ConvexPayoff parse_payoff(const std::string& spec, int N) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ConfigError("payoff", "expected kind:arguments, got '" + spec + "'");
    const std::string kind = spec.substr(0, colon);
    const auto args = split(spec.substr(colon + 1), ',');
    if (kind == "option") {
        if (args.size() != 1)
            throw ConfigError("payoff", "option:k takes one argument");
        const double k = parse_number(args[0], "payoff");
        if (k < 0.0)
            throw ConfigError("payoff", "strike must be non-negative");
        return call_payoff(k);
    }
    if (kind == "spline") {
        if (args.size() != 2)
            throw ConfigError("payoff", "spline:k,h takes two arguments");
        const double k = parse_number(args[0], "payoff"), h = parse_number(args[1], "payoff");
        if (!(h > 0.0))
            throw ConfigError("payoff", "h must be positive");
        if (N < 2)
            throw ConfigError("N", "must be at least 2");
        return spline_payoff(fit_reference_spline(N), k, h);
    }
    if (kind == "density") {
        if (args.size() != 3)
            throw ConfigError("payoff", "density:kernel,k,h takes three arguments");
        const double k = parse_number(args[1], "payoff"), h = parse_number(args[2], "payoff");
        if (!(h > 0.0))
            throw ConfigError("payoff", "h must be positive");
        return density_payoff(k, h, args[0]);
    }
    throw ConfigError("payoff", "unknown payoff kind '" + kind + "'");
}

json summary_json(const Summary& s) {
    return {{"mean", s.mean}, {"sd", s.sd},     {"min", s.min},   {"max", s.max},
            {"q025", s.q025}, {"q05", s.q05},   {"q95", s.q95},   {"q975", s.q975},
            {"count", s.count}};
}

json case_json(const CaseReport& c) {
    json j{{"N", c.N},
           {"delta", c.delta},
           {"h", c.h},
           {"mse", c.mse},
           {"mse_compat", c.mse_compat},
           {"vol_failures", c.vol_failures},
           {"band_breach",
            {{"below_90", c.below_90}, {"above_90", c.above_90}, {"below_95", c.below_95}, {"above_95", c.above_95}}},
           {"mise", c.mise}};
    json bias = json::object();
    for (std::size_t b = 0; b < 5; ++b)
        bias[std::string(to_string(static_cast<Moneyness>(b)))] = c.bucket_bias[b];
    j["bucket_bias"] = bias;
    for (const auto& [name, v] : {std::pair{"price", &c.price}, {"vol", &c.vol}, {"survival", &c.survival}}) {
        json arr = json::array();
        for (const auto& s : *v)
            arr.push_back(summary_json(s));
        j[name] = arr;
    }
    return j;
}

json report_json(const MCReport& r) {
    json j;
    j["model"] = {{"spot", r.model.spot},
                  {"rate", r.model.rate},
                  {"tau", r.model.tau},
                  {"first_strike", r.model.first_strike},
                  {"strike_step", r.model.strike_step},
                  {"strike_count", r.model.strike_count}};
    j["noise"] = {{"spread_rate", r.noise.spread_rate},
                  {"spread_floor", r.noise.spread_floor},
                  {"spread_cap", r.noise.spread_cap},
                  {"illiquidity_slope", r.noise.illiquidity_slope},
                  {"ask_floor", r.noise.ask_floor}};
    j["params"] = {{"sims", r.params.sims},
                   {"seed", r.params.seed},
                   {"N", r.params.N},
                   {"delta", r.params.delta},
                   {"smoother", r.params.smoother},
                   {"moneyness_edges", r.params.moneyness_edges}};
    j["strikes"] = r.strikes;
    j["true_price"] = r.true_price;
    j["true_vol"] = r.true_vol;
    j["true_survival"] = r.true_survival;
    json classes = json::array();
    for (auto m : r.bucket)
        classes.push_back(std::string(to_string(m)));
    j["moneyness"] = classes;
    json buckets = json::object();
    for (std::size_t b = 0; b < 5; ++b)
        buckets[std::string(to_string(static_cast<Moneyness>(b)))] = {
            {"count", r.bucket_count[b]}, {"mean", r.bucket_ineff_mean[b]}, {"max", r.bucket_ineff_max[b]}};
    j["inefficiency"] = {{"mean", r.ineff_mean},         {"max", r.ineff_max},
                         {"min", r.ineff_min},           {"share_ge_40", r.share_ge_40},
                         {"share_gt_40", r.share_gt_40}, {"buckets", buckets}};
    json cases = json::array();
    for (const auto& c : r.cases)
        cases.push_back(case_json(c));
    j["cases"] = cases;
    return j;
}

void write_bands(std::ostream& os, const MCReport& r) {
    os << "N,delta,strike,true_price,price_mean,price_q025,price_q05,price_q95,price_q975,"
          "true_vol,vol_mean,vol_q05,vol_q95,true_survival,survival_mean,survival_q05,survival_q95\n";
    for (const auto& c : r.cases)
        for (std::size_t k = 0; k < r.strikes.size(); ++k) {
            const auto &p = c.price[k], &v = c.vol[k], &s = c.survival[k];
            os << c.N << ',' << num(c.delta) << ',' << num(r.strikes[k]) << ',' << num(r.true_price[k]) << ','
               << num(p.mean) << ',' << num(p.q025) << ',' << num(p.q05) << ',' << num(p.q95) << ','
               << num(p.q975) << ',' << num(r.true_vol[k]) << ',' << num(v.mean) << ',' << num(v.q05) << ','
               << num(v.q95) << ',' << num(r.true_survival[k]) << ',' << num(s.mean) << ',' << num(s.q05) << ','
               << num(s.q95) << '\n';
        }
}

void write_density(std::ostream& os, const MCReport& r) {
    os << "N,delta,x,density_mean,density_true\n";
    for (const auto& c : r.cases)
        for (std::size_t i = 0; i < c.density_x.size(); ++i)
            os << c.N << ',' << num(c.delta) << ',' << num(c.density_x[i]) << ',' << num(c.density_mean[i]) << ','
               << num(c.density_true[i]) << '\n';
}

json error_json(const std::string& code, const std::string& message) {
    return {{"error", code}, {"message", message}};
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Non-parametric CALL price estimation by superhedging"};
    app.name("npcall");
    // -h would clash with the bandwidth option --h.
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_config("--config", "", "Key-value file mirroring the flags; flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    std::function<void()> action;

    // efficient-set
    InputOptions es_in;
    std::string es_out;
    auto* es = app.add_subcommand("efficient-set", "Mark efficient quotes and print q0 at every strike");
    es_in.attach(es);
    bool es_quotes = false;
    es->add_option("--output,-o", es_out, "CSV output path (default stdout)");
    es->add_flag("--quotes", es_quotes, "Write only the efficient quotes, in the input schema");
    es->callback([&] {
        action = [&] {
            const auto curve = es_in.load();
            const auto eff = efficient_set(curve);
            const auto flags = eff.efficiency_flags();
            Sink sink(es_out, out, "output");
            if (es_quotes) {
                write_quotes_csv(*sink, eff.as_quote_curve());
                return;
            }
            *sink << "strike,ask,efficient,q0\n";
            for (std::size_t i = 0; i < curve.size(); ++i)
                *sink << num(curve.strikes()[i]) << ',' << num(curve.asks()[i]) << ','
                      << (flags[i] ? "true" : "false") << ',' << num(q0_at(eff, curve.strikes()[i])) << '\n';
        };
    });

    // price
    InputOptions pr_in;
    std::string payoff;
    int pr_N = 10;
    bool pr_lp = false;
    auto* pr = app.add_subcommand("price", "Superhedging price of a payoff");
    pr_in.attach(pr);
    pr->add_option("--payoff", payoff, "option:k | spline:k,h | density:<kernel>,k,h")->required();
    pr->add_option("--N", pr_N, "Spline intervals for spline payoffs")->capture_default_str();
    pr->add_flag("--lp", pr_lp, "Also report the linear-programming price");
    pr->callback([&] {
        action = [&] {
            const auto f = parse_payoff(payoff, pr_N);
            const auto curve = pr_in.load();
            const auto eff = efficient_set(curve);
            const auto r = superhedge_price(f, eff);
            json j{{"payoff", payoff},
                   {"price", r.price},
                   {"price_dual", r.price_dual},
                   {"strikes", std::vector<double>(eff.strikes().begin(), eff.strikes().end())},
                   {"w", r.w},
                   {"b", r.b}};
            if (pr_lp)
                j["price_lp"] = lp_oracle(f, curve.strikes(), curve.asks());
            out << j.dump(2) << '\n';
        };
    });

    // smoother
    std::string sm_kind = "spline";
    double sm_k = 0.0, sm_h = 0.0;
    int sm_N = 10, sm_points = 401;
    std::string sm_out;
    auto* smc = app.add_subcommand("smoother", "Tabulate a smoothed payoff and its derivatives on [k-2h, k+2h]");
    smc->add_option("--kind", sm_kind, "spline or a kernel id")->capture_default_str();
    smc->add_option("--k", sm_k, "Centre strike")->required();
    smc->add_option("--h", sm_h, "Half-width / bandwidth")->required();
    smc->add_option("--N", sm_N, "Spline intervals")->capture_default_str();
    smc->add_option("--points", sm_points, "Grid points")->capture_default_str();
    smc->add_option("--output,-o", sm_out, "CSV output path (default stdout)");
    smc->callback([&] {
        action = [&] {
            if (!(sm_h > 0.0))
                throw ConfigError("h", "must be positive");
            if (sm_points < 2)
                throw ConfigError("points", "need at least 2 points");
            if (sm_N < 2)
                throw ConfigError("N", "must be at least 2");
            const ConvexPayoff g = sm_kind == "spline" ? spline_payoff(fit_reference_spline(sm_N), sm_k, sm_h)
                                                       : density_payoff(sm_k, sm_h, sm_kind);
            Sink sink(sm_out, out, "output");
            *sink << "x,g,dg,d2g\n";
            for (int i = 0; i < sm_points; ++i) {
                const double x = std::max(sm_k - 2.0 * sm_h + 4.0 * sm_h * i / (sm_points - 1), 0.0);
                *sink << num(x) << ',' << num(g(x)) << ',' << num(g.deriv(x)) << ',' << num(g.second_deriv(x))
                      << '\n';
            }
        };
    });

    // estimate
    InputOptions est_in;
    SmootherOptions est_sm;
    std::optional<double> est_from, est_to;
    int est_points = 101;
    std::string est_out;
    auto* est = app.add_subcommand("estimate", "Smoothed CALL function, implied survival and density on a grid");
    est_in.attach(est);
    est_sm.attach(est);
    est->add_option("--from", est_from, "Grid start (default: lowest positive strike)");
    est->add_option("--to", est_to, "Grid end (default: highest strike)");
    est->add_option("--points", est_points, "Grid points")->capture_default_str();
    est->add_option("--output,-o", est_out, "CSV output path (default stdout)");
    est->callback([&] {
        action = [&] {
            const auto curve = est_in.load();
            const auto eff = efficient_set(curve);
            const auto sc = est_sm.curve(curve, eff);
            if (est_points < 2)
                throw ConfigError("points", "need at least 2 points");
            const double lo = est_from.value_or(curve.strikes()[1]);
            const double hi = est_to.value_or(curve.strikes().back());
            if (!(hi > lo) || lo < 0.0)
                throw ConfigError("from", "need 0 <= from < to");
            for (const auto& w : sc.warnings())
                err << json{{"warning", w}}.dump() << '\n';
            Sink sink(est_out, out, "output");
            *sink << "k,q_delta,survival,density\n";
            for (int i = 0; i < est_points; ++i) {
                const double k = lo + (hi - lo) * i / (est_points - 1);
                *sink << num(k) << ',' << num(sc.price(k)) << ',' << num(sc.survival(k)) << ',' << num(sc.density(k))
                      << '\n';
            }
        };
    });

    // risk
    InputOptions rk_in;
    SmootherOptions rk_sm;
    std::string levels = "0.025,0.05";
    double rate = 0.0;
    std::optional<double> tau, position;
    std::string window;
    auto* rk = app.add_subcommand("risk", "VaR and CVaR under the implied conditional distribution");
    rk_in.attach(rk);
    rk_sm.attach(rk);
    rk->add_option("--levels", levels, "Comma-separated probabilities in (0,1]")->capture_default_str();
    rk->add_option("--rate", rate, "Continuously compounded rate for the futures price")->capture_default_str();
    rk->add_option("--tau", tau, "Years to maturity (default: from the quote timestamps)");
    rk->add_option("--position-price", position, "Value of the position (default: futures price)");
    rk->add_option("--window", window, "Conditioning window lo,hi (default: lowest to highest efficient strike)");
    rk->callback([&] {
        action = [&] {
            std::vector<double> lv;
            for (const auto& s : split(levels, ','))
                lv.push_back(parse_number(s, "levels"));
            if (lv.empty())
                throw ConfigError("levels", "at least one level is required");
            for (double a : lv)
                if (!(a > 0.0 && a <= 1.0))
                    throw ConfigError("levels", "levels must lie in (0, 1]");
            std::optional<std::pair<double, double>> win;
            if (!window.empty()) {
                const auto parts = split(window, ',');
                if (parts.size() != 2)
                    throw ConfigError("window", "expected lo,hi");
                win = std::make_pair(parse_number(parts[0], "window"), parse_number(parts[1], "window"));
            }
            const auto curve = rk_in.load();
            const auto eff = efficient_set(curve);
            const auto sc = rk_sm.curve(curve, eff);
            double pos = 0.0;
            if (position) {
                pos = *position;
            } else {
                double t = 0.0;
                if (tau) {
                    t = *tau;
                } else {
                    if (curve.maturity().empty() || curve.observed_at().empty())
                        throw ConfigError("tau", "give --tau or --position-price when the quotes carry no dates");
                    t = year_fraction(curve.observed_at(), curve.maturity());
                }
                if (!(t >= 0.0))
                    throw ConfigError("tau", "must be non-negative");
                pos = curve.underlying_ask() * std::exp(rate * t);
            }
            if (!(pos > 0.0))
                throw ConfigError("position_price", "must be positive");
            const auto rr = var_cvar(implied_survival(sc), pos, lv, win);
            out << json{{"levels", rr.levels},
                        {"quantile", rr.quantile},
                        {"var", rr.var},
                        {"cvar", rr.cvar},
                        {"position_price", rr.position_price},
                        {"window", {rr.window_lo, rr.window_hi}},
                        {"window_mass", rr.window_mass},
                        {"h", sc.h()}}
                       .dump(2)
                << '\n';
        };
    });

    // simulate
    MCParams mc;
    mc.N = {10};
    mc.delta = {5.0};
    std::string report_path, bands_path, density_path;
    bool no_density = false;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo study on the smile model with uniform ask noise");
    sim->add_option("--sims", mc.sims, "Number of simulated cross-sections")->capture_default_str();
    sim->add_option("--seed", mc.seed, "Master seed")->envname("NPCALL_SEED")->capture_default_str();
    sim->add_option("--delta", mc.delta, "Bandwidth multipliers")->delimiter(',')->capture_default_str();
    sim->add_option("--N", mc.N, "Spline intervals")->delimiter(',')->capture_default_str();
    sim->add_option("--smoother", mc.smoother, "spline or a kernel id")->capture_default_str();
    sim->add_option("--threads", mc.threads, "Worker threads (0: all cores)")->capture_default_str();
    sim->add_flag("--no-density", no_density, "Skip the average implied density");
    sim->add_option("--report", report_path, "JSON report path (default stdout)");
    sim->add_option("--bands", bands_path, "CSV of per-strike bands");
    sim->add_option("--density", density_path, "CSV of the average implied density");
    sim->callback([&] {
        action = [&] {
            if (mc.sims < 1)
                throw ConfigError("sims", "must be at least 1");
            for (double d : mc.delta)
                if (!(d > 0.0))
                    throw ConfigError("delta", "must be positive");
            for (int n : mc.N)
                if (n < 2)
                    throw ConfigError("N", "must be at least 2");
            mc.density = !no_density;
            const auto rep = run_mc(SmileModel{}, NoiseModel{}, mc);
            {
                Sink sink(report_path, out, "report");
                *sink << report_json(rep).dump(2) << '\n';
            }
            if (!bands_path.empty()) {
                Sink sink(bands_path, out, "bands");
                write_bands(*sink, rep);
            }
            if (!density_path.empty()) {
                Sink sink(density_path, out, "density");
                write_density(*sink, rep);
            }
        };
    });

    // mixture
    MixtureParams mx;
    double mx_step = 28.0;
    std::string mx_out;
    auto* mix = app.add_subcommand("mixture", "Implied density of a log-normal mixture from exact prices");
    mix->add_option("--h", mx.h, "Normal smoother bandwidth")->capture_default_str();
    mix->add_option("--strike-step", mx_step, "Strike step from 1000 (25 strikes)")->capture_default_str();
    mix->add_option("--output,-o", mx_out, "CSV of the conditional densities");
    mix->callback([&] {
        action = [&] {
            if (!(mx.h > 0.0))
                throw ConfigError("h", "must be positive");
            if (!(mx_step > 0.0))
                throw ConfigError("strike_step", "must be positive");
            for (int i = 0; i < 25; ++i)
                mx.strikes.push_back(1000.0 + mx_step * i);
            const auto r = mixture_experiment(MixtureModel{}, mx);
            out << json{{"mise", r.mise},
                        {"h", mx.h},
                        {"window", {mx.lo, mx.hi}},
                        {"strikes", r.strikes},
                        {"prices", r.prices}}
                       .dump(2)
                << '\n';
            if (!mx_out.empty()) {
                Sink sink(mx_out, out, "output");
                *sink << "x,estimate,truth\n";
                for (std::size_t i = 0; i < r.x.size(); ++i)
                    *sink << num(r.x[i]) << ',' << num(r.estimate[i]) << ',' << num(r.truth[i]) << '\n';
            }
        };
    });

    std::vector<std::string> argv_store{"npcall"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store)
        argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_json("usage", e.what()).dump() << '\n';
        return 2;
    }

    try {
        action();
    } catch (const ConfigError& e) {
        auto j = error_json(e.code(), e.what());
        j["field"] = e.field();
        err << j.dump() << '\n';
        return 2;
    } catch (const ParseError& e) {
        auto j = error_json(e.code(), e.what());
        j["line"] = e.line();
        err << j.dump() << '\n';
        return 1;
    } catch (const Error& e) {
        err << error_json(e.code(), e.what()).dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << error_json("internal", e.what()).dump() << '\n';
        return 1;
    }
    return 0;
}

} // namespace npcall::cli
