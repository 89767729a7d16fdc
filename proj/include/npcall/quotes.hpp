#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace npcall {

class EfficientCurve;

struct OptionQuote {
    double strike = 0.0;
    double ask = 0.0;
    std::int64_t ask_size = 0;
    std::string maturity;    // YYYY-MM-DD
    std::string observed_at; // YYYY-MM-DDTHH:MM[:SS]
};

// Cross-section of CALL asks for one maturity. strikes()[0] is always 0 and
// carries the underlying ask. Immutable once constructed.
class QuoteCurve {
public:
    QuoteCurve(std::vector<double> strikes, std::vector<double> asks, std::string maturity = {},
               std::optional<double> spot_hint = std::nullopt, std::vector<std::int64_t> ask_sizes = {},
               std::string observed_at = {});

    std::span<const double> strikes() const noexcept { return strikes_; }
    std::span<const double> asks() const noexcept { return asks_; }
    std::span<const std::int64_t> ask_sizes() const noexcept { return ask_sizes_; }
    std::size_t size() const noexcept { return strikes_.size(); }
    const std::string& maturity() const noexcept { return maturity_; }
    const std::string& observed_at() const noexcept { return observed_at_; }
    std::optional<double> spot_hint() const noexcept { return spot_hint_; }
    double underlying_ask() const noexcept { return asks_.front(); }

    bool operator==(const QuoteCurve&) const = default;

private:
    std::vector<double> strikes_;
    std::vector<double> asks_;
    std::vector<std::int64_t> ask_sizes_;
    std::string maturity_;
    std::string observed_at_;
    std::optional<double> spot_hint_;
};

struct LoadOptions {
    std::int64_t min_ask_size = 100;
    std::optional<std::string> maturity;    // keep only rows with this maturity
    std::optional<std::string> observed_at; // keep only rows with this timestamp
    std::optional<double> spot;             // strike-0 ask when the file has none
};

// Reads `strike,ask,ask_size,maturity,observed_at` CSV. Rows below the ask-size
// threshold are dropped and duplicate strikes keep the lowest ask.
QuoteCurve load_quotes(std::istream& in, const LoadOptions& options = {});

// Writes a curve back in the same schema; load_quotes on the output (with
// min_ask_size <= the stored sizes) reproduces the curve exactly.
void write_quotes_csv(std::ostream& out, const QuoteCurve& curve);

struct MeshStats {
    double mesh_all = 0.0;
    std::optional<double> mesh_efficient;
};

double max_gap(std::span<const double> positive_strikes);

MeshStats mesh(const QuoteCurve& curve, const EfficientCurve* efficient = nullptr);

enum class Moneyness { dITM, ITM, ATM, OTM, dOTM };

inline constexpr std::array<double, 4> kDefaultMoneynessEdges{0.85, 0.96, 1.06, 1.14};

// Buckets by forward moneyness e^{r tau} * strike / spot.
Moneyness moneyness_class(double spot, double strike, double rate, double tau,
                          const std::array<double, 4>& edges = kDefaultMoneynessEdges);

std::string_view to_string(Moneyness m);

// Calendar helpers for the ISO-8601 fields.
bool is_iso_date(std::string_view s);
bool is_iso_timestamp(std::string_view s);
// ACT/365 year fraction between a timestamp (or date) and a maturity date.
double year_fraction(std::string_view from, std::string_view to);

} // namespace npcall
