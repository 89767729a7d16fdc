#pragma once

#include "npcall/superhedge.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace npcall {

// Cubic spline g on [k-h, k+h] with g = 0 to the left and g = x - k to the
// right, fitted to (x - k)^+ at N+1 equally spaced knots under g'' >= 0 with
// roughness weight (0.1 h)^3. The spline is stored by its knot values and
// knot second derivatives.
class SplinePayoff {
public:
    // Solves the shape-constrained fit directly at (k, h).
    static SplinePayoff fit(double k, double h, int N = 10);

    double k() const noexcept { return k_; }
    double h() const noexcept { return h_; }
    int N() const noexcept { return static_cast<int>(values_.size()) - 1; }
    double lambda() const noexcept { return 1e-3 * h_ * h_ * h_; }
    // Absolute knot abscissae k + t_i.
    std::vector<double> knots() const;
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> second_derivs() const noexcept { return m_; }
    int qp_iterations() const noexcept { return iterations_; }

    double value(double x) const;
    double deriv(double x) const;
    double second_deriv(double x) const;

    ConvexPayoff payoff() const;

private:
    SplinePayoff(double k, double h, std::vector<double> values, std::vector<double> m, int iterations);

    double k_, h_;
    std::vector<double> values_;
    std::vector<double> m_;
    int iterations_;
};

// The single reference fit that every spline payoff is rescaled from.
SplinePayoff fit_reference_spline(int N = 10, double h0 = 10.0, double k0 = 100.0);

// g_k^h(x) = (h/h0) g_ref(k0 + (x - k) h0 / h); no optimisation is run.
ConvexPayoff spline_payoff(const SplinePayoff& ref, double k, double h);

// A zero-mean probability density with finite first absolute moment.
struct Kernel {
    std::string id;
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    // int_{-inf}^{z} u pdf(u) du
    std::function<double(double)> partial_moment;
    // int |u| pdf(u) du
    double abs_moment = 0.0;
};

// Throws ConfigError on unknown ids. "normal" is always registered.
const Kernel& find_kernel(const std::string& id);
void register_kernel(Kernel kernel);
std::vector<std::string> kernel_ids();

// g(x) = (x - k) Phi(z) - h int_{-inf}^{z} u phi(u) du with z = (x - k)/h,
// i.e. the option payoff averaged over strikes distributed as k + h * kernel.
ConvexPayoff density_payoff(double k, double h, const std::string& kernel = "normal");

// The family g_k^h(x) = h G((x - k)/h) through its unit shape G. Both smoother
// kinds scale this way; the estimator works directly on G and its derivatives.
class Smoother {
public:
    static Smoother spline(const SplinePayoff& ref);
    static Smoother spline(int N = 10);
    static Smoother kernel(const std::string& id = "normal");

    const std::string& kind() const noexcept { return kind_; }
    // N for splines, 0 for kernels.
    int N() const noexcept { return N_; }

    double G(double u) const { return G_(u); }
    double dG(double u) const { return dG_(u); }
    double d2G(double u) const { return d2G_(u); }
    // Half-width of the support of G'' in units of h (infinite for kernels).
    double support() const noexcept { return support_; }

    ConvexPayoff payoff(double k, double h) const;

private:
    std::string kind_;
    int N_ = 0;
    double support_ = 0.0;
    std::function<double(double)> G_, dG_, d2G_;
};

} // namespace npcall
