#include "npcall/simulation.hpp"

#include "npcall/black_scholes.hpp"
#include "npcall/efficient_set.hpp"
#include "npcall/error.hpp"
#include "npcall/implied_measure.hpp"
#include "npcall/smoothers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace npcall {

std::vector<double> SmileModel::strikes() const {
    std::vector<double> k(static_cast<std::size_t>(strike_count));
    for (int i = 0; i < strike_count; ++i)
        k[static_cast<std::size_t>(i)] = first_strike + strike_step * i;
    return k;
}

double SmileModel::vol(double k) const { return vol_at_first - vol_drop * (k - first_strike) / vol_span; }

double SmileModel::price(double k) const { return bs_call(spot, k, rate, tau, vol(k)); }

double SmileModel::survival(double k) const { return smile_survival(spot, k, rate, tau, vol(k), vol_slope()); }

double SmileModel::density(double k) const { return smile_density(spot, k, rate, tau, vol(k), vol_slope()); }

double NoiseModel::illiquidity(const SmileModel& m, double k) const {
    return 1.0 + illiquidity_slope * std::abs(std::exp(m.rate * m.tau) * k / m.spot - 1.0);
}

double NoiseModel::spread(double price) const { return std::clamp(spread_rate * price, spread_floor, spread_cap); }

double NoiseModel::radius(const SmileModel& m, double k) const {
    return radius_scale * illiquidity(m, k) * spread(m.price(k)) / 2.0;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; !failed && (i = next++) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true))
                        error = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

double quantile_sorted(const std::vector<double>& v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= v.size())
        return v.back();
    return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> x;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i)
        x.push_back(lo + step * static_cast<double>(i));
    return x;
}

Smoother make_smoother(const std::string& kind, int N) {
    if (kind == "spline")
        return Smoother::spline(N);
    return Smoother::kernel(kind);
}

} // namespace

double uniform_draw(std::uint64_t seed, std::uint64_t sim, std::uint64_t strike) {
    const std::uint64_t x = splitmix(splitmix(splitmix(seed) ^ sim) ^ (strike * 0xd1b54a32d192ed03ULL));
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

QuoteCurve simulate_curve(const SmileModel& model, const NoiseModel& noise, std::uint64_t seed, std::uint64_t sim) {
    const auto ks = model.strikes();
    std::vector<double> strikes{0.0}, asks{model.spot};
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double r = noise.radius(model, ks[i]);
        const double eps = r * (2.0 * uniform_draw(seed, sim, i) - 1.0);
        strikes.push_back(ks[i]);
        asks.push_back(std::max(model.price(ks[i]) + eps, noise.ask_floor));
    }
    return QuoteCurve(std::move(strikes), std::move(asks), {}, model.spot);
}

Summary summarize(std::vector<double> values) {
    std::erase_if(values, [](double v) { return !std::isfinite(v); });
    Summary s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        s.mean = s.sd = s.min = s.max = s.q025 = s.q05 = s.q95 = s.q975 = nan;
        return s;
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values)
        sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values)
        ss += (v - s.mean) * (v - s.mean);
    s.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    s.min = values.front();
    s.max = values.back();
    s.q025 = quantile_sorted(values, 0.025);
    s.q05 = quantile_sorted(values, 0.05);
    s.q95 = quantile_sorted(values, 0.95);
    s.q975 = quantile_sorted(values, 0.975);
    return s;
}

MCReport run_mc(const SmileModel& model, const NoiseModel& noise, const MCParams& params) {
    if (params.sims < 1)
        throw ConfigError("sims", "need at least one simulation");
    for (double d : params.delta)
        if (!(d > 0.0))
            throw ConfigError("delta", "must be positive");
    for (int n : params.N)
        if (n < 2)
            throw ConfigError("N", "need at least 2 spline intervals");

    MCReport rep;
    rep.model = model;
    rep.noise = noise;
    rep.params = params;
    rep.strikes = model.strikes();
    const std::size_t K = rep.strikes.size();
    for (double k : rep.strikes) {
        rep.true_price.push_back(model.price(k));
        rep.true_vol.push_back(model.vol(k));
        rep.true_survival.push_back(model.survival(k));
        const auto b = moneyness_class(model.spot, k, model.rate, model.tau, params.moneyness_edges);
        rep.bucket.push_back(b);
        ++rep.bucket_count[static_cast<std::size_t>(b)];
    }

    std::map<int, Smoother> smoothers;
    for (int n : params.N)
        if (!smoothers.contains(n))
            smoothers.emplace(n, make_smoother(params.smoother, n));
    struct Case {
        int N;
        double delta;
    };
    std::vector<Case> cases;
    for (int n : params.N)
        for (double d : params.delta)
            cases.push_back({n, d});
    const std::size_t C = cases.size();
    const auto S = static_cast<std::size_t>(params.sims);

    const std::vector<double> dx =
        params.density ? grid(params.density_lo, params.density_hi, params.density_step) : std::vector<double>{};
    const std::size_t X = dx.size();

    std::vector<double> q(C * S * K), v(C * S * K), nu(C * S * K);
    std::vector<int> ineff(S * 6, 0);
    std::vector<double> mesh_h(C, 0.0);

    constexpr std::size_t block = 64;
    const std::size_t blocks = (S + block - 1) / block;
    std::vector<double> dens(blocks * C * X, 0.0);

    parallel_for(blocks, params.threads, [&](std::size_t blk) {
        for (std::size_t s = blk * block; s < std::min(S, (blk + 1) * block); ++s) {
            const auto curve = simulate_curve(model, noise, params.seed, s);
            const auto eff = efficient_set(curve);
            const auto ms = mesh(curve);
            const auto flags = eff.efficiency_flags();
            for (std::size_t k = 0; k < K; ++k)
                if (!flags[k + 1]) {
                    ++ineff[s * 6 + 5];
                    ++ineff[s * 6 + static_cast<std::size_t>(rep.bucket[k])];
                }
            for (std::size_t c = 0; c < C; ++c) {
                const SmoothCallCurve sc(eff, smoothers.at(cases[c].N), cases[c].delta * ms.mesh_all);
                if (s == 0)
                    mesh_h[c] = sc.h();
                for (std::size_t k = 0; k < K; ++k) {
                    const std::size_t idx = (c * S + s) * K + k;
                    const double strike = rep.strikes[k];
                    q[idx] = sc.price(strike);
                    nu[idx] = sc.survival(strike);
                    try {
                        v[idx] = implied_vol(q[idx], model.spot, strike, model.rate, model.tau);
                    } catch (const NoSolutionError&) {
                        v[idx] = std::numeric_limits<double>::quiet_NaN();
                    }
                }
                double* acc = dens.data() + (blk * C + c) * X;
                for (std::size_t i = 0; i < X; ++i)
                    acc[i] += sc.density(dx[i]);
            }
        }
    });

    // Inefficiency, in percent of the positive strikes.
    double sum = 0.0, mx = 0.0, mn = 100.0, ge = 0.0, gt = 0.0;
    std::array<double, 5> bsum{}, bmax{};
    for (std::size_t s = 0; s < S; ++s) {
        const double rate = 100.0 * ineff[s * 6 + 5] / static_cast<double>(K);
        sum += rate;
        mx = std::max(mx, rate);
        mn = std::min(mn, rate);
        // 10 of 25 strikes is exactly 40%; compare on counts to avoid rounding.
        if (ineff[s * 6 + 5] * 5 >= 2 * static_cast<int>(K))
            ge += 1.0;
        if (ineff[s * 6 + 5] * 5 > 2 * static_cast<int>(K))
            gt += 1.0;
        for (std::size_t b = 0; b < 5; ++b)
            if (rep.bucket_count[b] > 0) {
                const double r = 100.0 * ineff[s * 6 + b] / rep.bucket_count[b];
                bsum[b] += r;
                bmax[b] = std::max(bmax[b], r);
            }
    }
    rep.ineff_mean = sum / static_cast<double>(S);
    rep.ineff_max = mx;
    rep.ineff_min = mn;
    rep.share_ge_40 = 100.0 * ge / static_cast<double>(S);
    rep.share_gt_40 = 100.0 * gt / static_cast<double>(S);
    for (std::size_t b = 0; b < 5; ++b) {
        rep.bucket_ineff_mean[b] = bsum[b] / static_cast<double>(S);
        rep.bucket_ineff_max[b] = bmax[b];
    }

    for (std::size_t c = 0; c < C; ++c) {
        CaseReport cr;
        cr.N = cases[c].N;
        cr.delta = cases[c].delta;
        cr.h = mesh_h[c];
        double se = 0.0, se_compat = 0.0;
        std::array<double, 5> bias{};
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t k = 0; k < K; ++k) {
                const double e = q[(c * S + s) * K + k] - rep.true_price[k];
                se += e * e;
                if (k > 0)
                    se_compat += e * e;
                bias[static_cast<std::size_t>(rep.bucket[k])] += e;
            }
        cr.mse = se / static_cast<double>(S * K);
        cr.mse_compat = K > 1 ? se_compat / static_cast<double>(S * (K - 1)) : cr.mse;
        for (std::size_t b = 0; b < 5; ++b)
            cr.bucket_bias[b] = rep.bucket_count[b] > 0 ? bias[b] / static_cast<double>(S * rep.bucket_count[b]) : 0.0;

        std::vector<double> col(S);
        int below90 = 0, above90 = 0, below95 = 0, above95 = 0;
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t s = 0; s < S; ++s)
                col[s] = q[(c * S + s) * K + k];
            const auto ps = summarize(col);
            cr.price.push_back(ps);
            const double f = rep.true_price[k];
            below90 += f < ps.q05;
            above90 += f > ps.q95;
            below95 += f < ps.q025;
            above95 += f > ps.q975;
            for (std::size_t s = 0; s < S; ++s)
                col[s] = v[(c * S + s) * K + k];
            cr.vol.push_back(summarize(col));
            cr.vol_failures += static_cast<int>(S) - cr.vol.back().count;
            for (std::size_t s = 0; s < S; ++s)
                col[s] = nu[(c * S + s) * K + k];
            cr.survival.push_back(summarize(col));
        }
        cr.below_90 = below90 / static_cast<double>(K);
        cr.above_90 = above90 / static_cast<double>(K);
        cr.below_95 = below95 / static_cast<double>(K);
        cr.above_95 = above95 / static_cast<double>(K);

        if (X > 0) {
            cr.density_x = dx;
            cr.density_mean.assign(X, 0.0);
            for (std::size_t blk = 0; blk < blocks; ++blk)
                for (std::size_t i = 0; i < X; ++i)
                    cr.density_mean[i] += dens[(blk * C + c) * X + i];
            std::vector<double> err2(X);
            for (std::size_t i = 0; i < X; ++i) {
                cr.density_mean[i] /= static_cast<double>(S);
                cr.density_true.push_back(model.density(dx[i]));
                err2[i] = (cr.density_mean[i] - cr.density_true[i]) * (cr.density_mean[i] - cr.density_true[i]);
            }
            cr.mise = trapezoid(dx, err2);
        }
        rep.cases.push_back(std::move(cr));
    }
    return rep;
}

ConvergenceReport convergence_study(const SmileModel& model, const NoiseModel& noise, const ConvergenceParams& p) {
    if (p.sims < 1)
        throw ConfigError("sims", "need at least one simulation");
    if (!(p.delta > 0.0))
        throw ConfigError("delta", "must be positive");
    const Smoother sm = Smoother::spline(p.N);
    const auto tt = grid(p.lo, p.hi, p.eval_step);
    std::vector<double> truth;
    for (double t : tt)
        truth.push_back(model.price(t));

    ConvergenceReport rep;
    for (double step : p.steps) {
        if (!(step > 0.0))
            throw ConfigError("steps", "strike steps must be positive");
        SmileModel m = model;
        m.strike_step = step;
        m.strike_count = static_cast<int>(std::lround((p.last_strike - model.first_strike) / step)) + 1;
        NoiseModel nz = noise;
        nz.radius_scale *= std::pow(step / p.reference_step, p.radius_power);

        const auto S = static_cast<std::size_t>(p.sims);
        std::vector<double> err(S * tt.size());
        parallel_for(S, p.threads, [&](std::size_t s) {
            const auto curve = simulate_curve(m, nz, p.seed, s);
            const auto eff = efficient_set(curve);
            const SmoothCallCurve sc(eff, sm, p.delta * mesh(curve).mesh_all);
            for (std::size_t i = 0; i < tt.size(); ++i) {
                const double e = sc.price(tt[i]) - truth[i];
                err[s * tt.size() + i] = e * e;
            }
        });
        double sup = 0.0, mean = 0.0;
        for (std::size_t i = 0; i < tt.size(); ++i) {
            double acc = 0.0;
            for (std::size_t s = 0; s < S; ++s)
                acc += err[s * tt.size() + i];
            acc /= static_cast<double>(S);
            sup = std::max(sup, acc);
            mean += acc / static_cast<double>(tt.size());
        }
        rep.steps.push_back(step);
        rep.sup_mse.push_back(sup);
        rep.mean_mse.push_back(mean);
    }
    return rep;
}

void MixtureModel::validate() const {
    if (mu.size() != sigma.size() || mu.size() != weight.size() || mu.empty())
        throw ConfigError("mixture", "mu, sigma and weight must have equal, non-zero length");
    double total = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) {
        if (weight[i] < 0.0)
            throw ConfigError("mixture.weight", "weights must be non-negative");
        if (!(sigma[i] > 0.0))
            throw ConfigError("mixture.sigma", "volatilities must be positive");
        total += weight[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw ConfigError("mixture.weight", "weights must sum to 1");
}

double MixtureModel::price(double k) const {
    double v = 0.0;
    const double disc = std::exp(-rate * tau);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double fwd = spot * std::exp(mu[i] * tau);
        // Black formula on the component forward.
        v += weight[i] * disc * bs_call(fwd, k, 0.0, tau, sigma[i]);
    }
    return v;
}

double MixtureModel::density(double x) const {
    if (x <= 0.0)
        return 0.0;
    double v = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double s = sigma[i] * std::sqrt(tau);
        const double mean = std::log(spot) + (mu[i] - 0.5 * sigma[i] * sigma[i]) * tau;
        v += weight[i] * norm_pdf((std::log(x) - mean) / s) / (x * s);
    }
    return v;
}

MixtureResult mixture_experiment(const MixtureModel& model, const MixtureParams& p) {
    model.validate();
    if (!(p.h > 0.0))
        throw ConfigError("h", "bandwidth must be positive");
    if (!(p.hi > p.lo) || !(p.step > 0.0))
        throw ConfigError("window", "need lo < hi and a positive step");
    MixtureResult r;
    r.strikes = p.strikes;
    if (r.strikes.empty())
        r.strikes = SmileModel{}.strikes();

    std::vector<double> ks{0.0}, qs{model.price(0.0)};
    for (double k : r.strikes) {
        r.prices.push_back(model.price(k));
        ks.push_back(k);
        qs.push_back(r.prices.back());
    }
    const auto eff = efficient_set(QuoteCurve(ks, qs));
    const SmoothCallCurve sc(eff, Smoother::kernel(p.kernel), p.h);

    r.x = grid(p.lo, p.hi, p.step);
    for (double x : r.x) {
        r.estimate.push_back(sc.density(x));
        r.truth.push_back(model.density(x));
    }
    const double me = trapezoid(r.x, r.estimate), mt = trapezoid(r.x, r.truth);
    if (!(me > 0.0) || !(mt > 0.0))
        throw DegenerateMeasureError("no density mass on the evaluation window");
    std::vector<double> err2(r.x.size());
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        r.estimate[i] /= me;
        r.truth[i] /= mt;
        err2[i] = (r.estimate[i] - r.truth[i]) * (r.estimate[i] - r.truth[i]);
    }
    r.mise = trapezoid(r.x, err2);
    return r;
}

} // namespace npcall
