#pragma once

#include "npcall/quotes.hpp"

#include <memory>
#include <span>
#include <vector>

namespace npcall {

// The efficient strikes j_0 = 0 < j_1 < ... < j_I with their asks. Prices are
// positive, non-increasing and convex in strike, so q0 interpolating them is
// the superhedging CALL function.
class EfficientCurve {
public:
    // Validates the shape invariants; throws InvalidCurveError.
    EfficientCurve(std::vector<double> strikes, std::vector<double> prices,
                   std::shared_ptr<const QuoteCurve> source = nullptr, std::vector<std::size_t> source_index = {});

    std::span<const double> strikes() const noexcept { return strikes_; }
    std::span<const double> prices() const noexcept { return prices_; }
    std::size_t size() const noexcept { return strikes_.size(); }
    // I, the index of the last efficient strike.
    std::size_t last() const noexcept { return strikes_.size() - 1; }
    // D_i(q) for i = 0..I-1.
    double slope(std::size_t i) const { return (prices_[i + 1] - prices_[i]) / (strikes_[i + 1] - strikes_[i]); }

    const QuoteCurve* source() const noexcept { return source_.get(); }
    // Position of each efficient strike in the source curve (empty without a source).
    std::span<const std::size_t> source_index() const noexcept { return source_index_; }
    // Per source strike: whether it is efficient.
    std::vector<bool> efficiency_flags() const;

    QuoteCurve as_quote_curve() const;

private:
    std::vector<double> strikes_;
    std::vector<double> prices_;
    std::shared_ptr<const QuoteCurve> source_;
    std::vector<std::size_t> source_index_;
};

EfficientCurve efficient_set(const QuoteCurve& curve);

// Superhedging price of the CALL with strike k.
double q0_at(const EfficientCurve& eff, double k);

// One piece of the step survival function: level on (lo, hi].
struct StepLevel {
    double lo;
    double hi; // +inf on the last piece
    double level;
};

std::vector<StepLevel> nu0(const EfficientCurve& eff);

// nu0(x > k) with the half-open (j_i, j_{i+1}] convention.
double nu0_at(const EfficientCurve& eff, double k);

} // namespace npcall
