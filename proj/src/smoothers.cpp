#include "npcall/smoothers.hpp"

#include "npcall/error.hpp"
#include "npcall/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace npcall {

SplinePayoff::SplinePayoff(double k, double h, std::vector<double> values, std::vector<double> m, int iterations)
    : k_(k), h_(h), values_(std::move(values)), m_(std::move(m)), iterations_(iterations) {}

SplinePayoff SplinePayoff::fit(double k, double h, int N) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw ConfigError("h", "half-width must be positive");
    if (N < 2)
        throw ConfigError("N", "need at least 2 spline intervals");

    const int n = N + 1;
    const double H = 2.0 * h / N;
    const double lambda = 1e-3 * h * h * h;
    auto gi = [](int i) { return i; };
    auto mi = [n](int i) { return n + i; };

    qp::Problem pr;
    pr.G = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    pr.c = Eigen::VectorXd::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
        const double t = -h + i * H;
        pr.G(gi(i), gi(i)) += 2.0;
        pr.c[gi(i)] -= 2.0 * std::max(t, 0.0);
    }
    // int (g'')^2 over one interval with g'' linear from m_i to m_{i+1}
    for (int i = 0; i < N; ++i) {
        const double w = 2.0 * lambda * H / 3.0;
        pr.G(mi(i), mi(i)) += w;
        pr.G(mi(i + 1), mi(i + 1)) += w;
        pr.G(mi(i), mi(i + 1)) += 0.5 * w;
        pr.G(mi(i + 1), mi(i)) += 0.5 * w;
    }

    const int n_eq = 4 + (N - 1) + 2;
    pr.A_eq = Eigen::MatrixXd::Zero(n_eq, 2 * n);
    pr.b_eq = Eigen::VectorXd::Zero(n_eq);
    int r = 0;
    pr.A_eq(r, gi(0)) = 1.0, pr.b_eq[r++] = 0.0;
    pr.A_eq(r, gi(N)) = 1.0, pr.b_eq[r++] = h;
    pr.A_eq(r, mi(0)) = 1.0, pr.b_eq[r++] = 0.0;
    pr.A_eq(r, mi(N)) = 1.0, pr.b_eq[r++] = 0.0;
    for (int i = 1; i < N; ++i, ++r) {
        pr.A_eq(r, gi(i + 1)) = 1.0 / H;
        pr.A_eq(r, gi(i)) = -2.0 / H;
        pr.A_eq(r, gi(i - 1)) = 1.0 / H;
        pr.A_eq(r, mi(i - 1)) = -H / 6.0;
        pr.A_eq(r, mi(i)) = -4.0 * H / 6.0;
        pr.A_eq(r, mi(i + 1)) = -H / 6.0;
    }
    // g'(k-h) = 0 and g'(k+h) = 1
    pr.A_eq(r, gi(1)) = 1.0 / H, pr.A_eq(r, gi(0)) = -1.0 / H;
    pr.A_eq(r, mi(0)) = -H / 3.0, pr.A_eq(r, mi(1)) = -H / 6.0;
    pr.b_eq[r++] = 0.0;
    pr.A_eq(r, gi(N)) = 1.0 / H, pr.A_eq(r, gi(N - 1)) = -1.0 / H;
    pr.A_eq(r, mi(N - 1)) = H / 6.0, pr.A_eq(r, mi(N)) = H / 3.0;
    pr.b_eq[r++] = 1.0;

    pr.A_in = Eigen::MatrixXd::Zero(N - 1, 2 * n);
    pr.b_in = Eigen::VectorXd::Zero(N - 1);
    for (int i = 1; i < N; ++i)
        pr.A_in(i - 1, mi(i)) = 1.0;

    // Feasible start: constant interior curvature, integrated from the left end.
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * n);
    const double curv = 1.0 / (H * (N - 1));
    for (int i = 1; i < N; ++i)
        x0[mi(i)] = curv;
    double slope = 0.0;
    for (int i = 0; i < N; ++i) {
        const double m0 = x0[mi(i)], m1 = x0[mi(i + 1)];
        x0[gi(i + 1)] = x0[gi(i)] + H * slope + H * H * (2.0 * m0 + m1) / 6.0;
        slope += H * (m0 + m1) / 2.0;
    }

    const auto res = qp::solve(pr, x0);
    std::vector<double> values(n), m(n);
    for (int i = 0; i < n; ++i) {
        values[i] = res.x[gi(i)];
        m[i] = std::max(res.x[mi(i)], 0.0);
    }
    // Pin the boundary values the constraints fix exactly.
    values.front() = 0.0;
    values.back() = h;
    m.front() = m.back() = 0.0;
    SplinePayoff sp(k, h, std::move(values), std::move(m), res.iterations);

    const double tol = 1e-9;
    for (int s = 0; s <= 2000; ++s) {
        const double x = k - h + 2.0 * h * s / 2000.0;
        const double d = sp.deriv(x);
        if (d < -tol || d > 1.0 + tol || sp.second_deriv(x) < -tol / h || sp.value(x) < -tol * h)
            throw SolverError("spline fit violates its shape constraints at x = " + std::to_string(x),
                              res.iterations);
    }
    return sp;
}

std::vector<double> SplinePayoff::knots() const {
    std::vector<double> out(values_.size());
    const int N = this->N();
    for (int i = 0; i <= N; ++i)
        out[i] = k_ - h_ + 2.0 * h_ * i / N;
    return out;
}

namespace {

struct Local {
    int i;
    double a, b, H;
};

Local locate(double x, double k, double h, int N) {
    const double H = 2.0 * h / N;
    const double u = (x - (k - h)) / H;
    const int i = std::clamp(static_cast<int>(std::floor(u)), 0, N - 1);
    const double a = (i + 1) - u;
    return {i, a, 1.0 - a, H};
}

} // namespace

double SplinePayoff::value(double x) const {
    if (x <= k_ - h_)
        return 0.0;
    if (x >= k_ + h_)
        return x - k_;
    const auto [i, a, b, H] = locate(x, k_, h_, N());
    return a * values_[i] + b * values_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * H * H / 6.0;
}

double SplinePayoff::deriv(double x) const {
    if (x <= k_ - h_)
        return 0.0;
    if (x >= k_ + h_)
        return 1.0;
    const auto [i, a, b, H] = locate(x, k_, h_, N());
    return (values_[i + 1] - values_[i]) / H - (3.0 * a * a - 1.0) / 6.0 * H * m_[i] +
           (3.0 * b * b - 1.0) / 6.0 * H * m_[i + 1];
}

double SplinePayoff::second_deriv(double x) const {
    if (x <= k_ - h_ || x >= k_ + h_)
        return 0.0;
    const auto [i, a, b, H] = locate(x, k_, h_, N());
    return a * m_[i] + b * m_[i + 1];
}

ConvexPayoff SplinePayoff::payoff() const {
    auto self = std::make_shared<const SplinePayoff>(*this);
    return ConvexPayoff([self](double x) { return self->value(x); }, [self](double x) { return self->deriv(x); },
                        [self](double x) { return self->second_deriv(x); }, 1.0,
                        "spline:" + std::to_string(k_) + "," + std::to_string(h_));
}

SplinePayoff fit_reference_spline(int N, double h0, double k0) {
    return SplinePayoff::fit(k0, h0, N);
}

ConvexPayoff spline_payoff(const SplinePayoff& ref, double k, double h) {
    if (!(h > 0.0))
        throw ConfigError("h", "half-width must be positive");
    auto r = std::make_shared<const SplinePayoff>(ref);
    const double s = ref.h() / h;
    auto arg = [r, k, s](double x) { return r->k() + (x - k) * s; };
    return ConvexPayoff([r, arg, s](double x) { return r->value(arg(x)) / s; },
                        [r, arg](double x) { return r->deriv(arg(x)); },
                        [r, arg, s](double x) { return r->second_deriv(arg(x)) * s; }, 1.0,
                        "spline:" + std::to_string(k) + "," + std::to_string(h));
}

namespace {

Kernel normal_kernel() {
    Kernel kn;
    kn.id = "normal";
    kn.pdf = [](double z) { return std::exp(-0.5 * z * z) * std::numbers::inv_sqrtpi / std::numbers::sqrt2; };
    kn.cdf = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
    kn.partial_moment = [pdf = kn.pdf](double z) { return -pdf(z); };
    kn.abs_moment = std::sqrt(2.0 / std::numbers::pi);
    return kn;
}

struct Registry {
    std::mutex mu;
    std::map<std::string, std::shared_ptr<const Kernel>> kernels;
    Registry() { kernels["normal"] = std::make_shared<const Kernel>(normal_kernel()); }
};

Registry& registry() {
    static Registry r;
    return r;
}

} // namespace

const Kernel& find_kernel(const std::string& id) {
    auto& reg = registry();
    std::lock_guard lock(reg.mu);
    const auto it = reg.kernels.find(id);
    if (it == reg.kernels.end())
        throw ConfigError("kernel", "unknown kernel '" + id + "'");
    return *it->second;
}

void register_kernel(Kernel kernel) {
    if (kernel.id.empty() || !kernel.pdf || !kernel.cdf || !kernel.partial_moment)
        throw ConfigError("kernel", "kernel needs an id, pdf, cdf and partial moment");
    auto entry = std::make_shared<const Kernel>(std::move(kernel));
    auto& reg = registry();
    std::lock_guard lock(reg.mu);
    reg.kernels[entry->id] = std::move(entry);
}

std::vector<std::string> kernel_ids() {
    auto& reg = registry();
    std::lock_guard lock(reg.mu);
    std::vector<std::string> ids;
    for (const auto& [id, _] : reg.kernels)
        ids.push_back(id);
    return ids;
}

ConvexPayoff density_payoff(double k, double h, const std::string& kernel) {
    if (!(h > 0.0))
        throw ConfigError("h", "bandwidth must be positive");
    return Smoother::kernel(kernel).payoff(k, h);
}

Smoother Smoother::spline(const SplinePayoff& ref) {
    auto r = std::make_shared<const SplinePayoff>(ref);
    const double k0 = ref.k(), h0 = ref.h();
    Smoother s;
    s.kind_ = "spline";
    s.N_ = ref.N();
    s.support_ = 1.0;
    s.G_ = [r, k0, h0](double u) { return r->value(k0 + u * h0) / h0; };
    s.dG_ = [r, k0, h0](double u) { return r->deriv(k0 + u * h0); };
    s.d2G_ = [r, k0, h0](double u) { return r->second_deriv(k0 + u * h0) * h0; };
    return s;
}

Smoother Smoother::spline(int N) { return spline(fit_reference_spline(N)); }

Smoother Smoother::kernel(const std::string& id) {
    // Copy so later registrations cannot invalidate the functions held here.
    const auto kn = std::make_shared<const Kernel>(find_kernel(id));
    Smoother s;
    s.kind_ = kn->id;
    s.support_ = std::numeric_limits<double>::infinity();
    s.G_ = [kn](double u) { return u * kn->cdf(u) - kn->partial_moment(u); };
    s.dG_ = [kn](double u) { return kn->cdf(u); };
    s.d2G_ = [kn](double u) { return kn->pdf(u); };
    return s;
}

ConvexPayoff Smoother::payoff(double k, double h) const {
    if (!(h > 0.0))
        throw ConfigError("h", "half-width must be positive");
    auto G = G_, dG = dG_, d2G = d2G_;
    return ConvexPayoff([G, k, h](double x) { return h * G((x - k) / h); },
                        [dG, k, h](double x) { return dG((x - k) / h); },
                        [d2G, k, h](double x) { return d2G((x - k) / h) / h; }, 1.0,
                        kind_ + ":" + std::to_string(k) + "," + std::to_string(h));
}

} // namespace npcall
