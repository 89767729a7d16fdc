#include "npcall/quotes.hpp"

#include "npcall/efficient_set.hpp"
#include "npcall/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace npcall {

QuoteCurve::QuoteCurve(std::vector<double> strikes, std::vector<double> asks, std::string maturity,
                       std::optional<double> spot_hint, std::vector<std::int64_t> ask_sizes,
                       std::string observed_at)
    : strikes_(std::move(strikes)), asks_(std::move(asks)), ask_sizes_(std::move(ask_sizes)),
      maturity_(std::move(maturity)), observed_at_(std::move(observed_at)), spot_hint_(spot_hint) {
    if (strikes_.empty())
        throw EmptyCurveError("quote curve has no strikes");
    if (strikes_.size() != asks_.size())
        throw InvalidCurveError("strikes and asks differ in length");
    if (ask_sizes_.empty())
        ask_sizes_.assign(strikes_.size(), 0);
    if (ask_sizes_.size() != strikes_.size())
        throw InvalidCurveError("ask sizes differ in length");
    if (strikes_.front() != 0.0)
        throw MissingNumeraireError("first strike must be 0 (underlying ask)");
    for (std::size_t i = 0; i < strikes_.size(); ++i) {
        if (!(asks_[i] > 0.0) || !std::isfinite(asks_[i]))
            throw InvalidCurveError("ask at strike " + std::to_string(strikes_[i]) + " is not positive");
        if (i > 0 && !(strikes_[i] > strikes_[i - 1]))
            throw InvalidCurveError("strikes must be strictly increasing");
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view s, std::size_t line, const char* field) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(line, std::string("bad ") + field + " '" + std::string(s) + "'");
    return v;
}

std::int64_t parse_int(std::string_view s, std::size_t line, const char* field) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        // sizes occasionally come as "100.0"
        double d = parse_double(s, line, field);
        if (d != std::floor(d))
            throw ParseError(line, std::string("bad ") + field + " '" + std::string(s) + "'");
        return static_cast<std::int64_t>(d);
    }
    return v;
}

void write_double(std::ostream& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
}

bool digits(std::string_view s, std::size_t pos, std::size_t n) {
    if (s.size() < pos + n)
        return false;
    for (std::size_t i = pos; i < pos + n; ++i)
        if (s[i] < '0' || s[i] > '9')
            return false;
    return true;
}

int to_int(std::string_view s, std::size_t pos, std::size_t n) {
    int v = 0;
    std::from_chars(s.data() + pos, s.data() + pos + n, v);
    return v;
}

// days since 1970-01-01 (proleptic Gregorian)
long days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

double to_days(std::string_view s) {
    if (!is_iso_date(s.substr(0, 10)))
        throw ConfigError("date", "not an ISO-8601 date: " + std::string(s));
    double days = static_cast<double>(
        days_from_civil(to_int(s, 0, 4), static_cast<unsigned>(to_int(s, 5, 2)), static_cast<unsigned>(to_int(s, 8, 2))));
    if (s.size() >= 16) {
        days += to_int(s, 11, 2) / 24.0 + to_int(s, 14, 2) / 1440.0;
        if (s.size() >= 19 && s[16] == ':')
            days += to_int(s, 17, 2) / 86400.0;
    }
    return days;
}

} // namespace

bool is_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !digits(s, 0, 4) || !digits(s, 5, 2) || !digits(s, 8, 2))
        return false;
    int m = to_int(s, 5, 2), d = to_int(s, 8, 2);
    return m >= 1 && m <= 12 && d >= 1 && d <= 31;
}

bool is_iso_timestamp(std::string_view s) {
    if (s.size() == 10)
        return is_iso_date(s);
    if (s.size() < 16 || !is_iso_date(s.substr(0, 10)) || (s[10] != 'T' && s[10] != ' '))
        return false;
    if (!digits(s, 11, 2) || s[13] != ':' || !digits(s, 14, 2))
        return false;
    std::string_view rest = s.substr(16);
    if (rest.size() >= 3 && rest[0] == ':') {
        if (!digits(rest, 1, 2))
            return false;
        rest.remove_prefix(3);
        if (!rest.empty() && rest[0] == '.') {
            rest.remove_prefix(1);
            while (!rest.empty() && rest[0] >= '0' && rest[0] <= '9')
                rest.remove_prefix(1);
        }
    }
    return rest.empty() || rest == "Z" ||
           (rest.size() == 6 && (rest[0] == '+' || rest[0] == '-') && rest[3] == ':');
}

double year_fraction(std::string_view from, std::string_view to) {
    return (to_days(to) - to_days(from)) / 365.0;
}

QuoteCurve load_quotes(std::istream& in, const LoadOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> col;
    const std::array<const char*, 5> required{"strike", "ask", "ask_size", "maturity", "observed_at"};

    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty())
            break;
    }
    if (line_no == 0 || trim(line).empty())
        throw EmptyCurveError("no header found");
    {
        auto header = split(line);
        if (!header.empty() && header[0].size() >= 3 && header[0].substr(0, 3) == "\xEF\xBB\xBF")
            header[0].remove_prefix(3);
        for (std::size_t i = 0; i < header.size(); ++i)
            col[std::string(header[i])] = i;
        for (const char* name : required)
            if (!col.count(name))
                throw ParseError(line_no, std::string("missing column '") + name + "'");
    }

    struct Best {
        double ask;
        std::int64_t size;
    };
    std::map<double, Best> best;
    std::string maturity = options.maturity.value_or("");
    std::string observed = options.observed_at.value_or("");
    std::size_t rows = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        auto cells = split(line);
        if (cells.size() < col.size())
            throw ParseError(line_no, "expected " + std::to_string(col.size()) + " fields, got " +
                                          std::to_string(cells.size()));
        const double strike = parse_double(cells[col["strike"]], line_no, "strike");
        const double ask = parse_double(cells[col["ask"]], line_no, "ask");
        const std::int64_t size = parse_int(cells[col["ask_size"]], line_no, "ask_size");
        const std::string_view mat = cells[col["maturity"]];
        const std::string_view at = cells[col["observed_at"]];
        if (strike < 0.0)
            throw ParseError(line_no, "negative strike");
        if (!(ask > 0.0))
            throw ParseError(line_no, "ask must be positive");
        if (size < 0)
            throw ParseError(line_no, "negative ask_size");
        if (!is_iso_date(mat))
            throw ParseError(line_no, "maturity is not YYYY-MM-DD: '" + std::string(mat) + "'");
        if (!is_iso_timestamp(at))
            throw ParseError(line_no, "observed_at is not ISO-8601: '" + std::string(at) + "'");

        if (options.maturity && mat != *options.maturity)
            continue;
        if (options.observed_at && at != *options.observed_at)
            continue;
        if (size < options.min_ask_size)
            continue;
        if (maturity.empty())
            maturity = std::string(mat);
        else if (!options.maturity && mat != maturity)
            throw ParseError(line_no, "mixed maturities; select one with a maturity filter");
        if (observed.empty())
            observed = std::string(at);
        ++rows;

        auto it = best.find(strike);
        if (it == best.end())
            best.emplace(strike, Best{ask, size});
        else if (ask < it->second.ask)
            it->second = Best{ask, size};
    }

    if (rows == 0 && !options.spot)
        throw EmptyCurveError("no quotes survive the filters");
    if (!best.count(0.0)) {
        if (!options.spot)
            throw MissingNumeraireError("no strike-0 (underlying) ask; supply a spot price");
        if (!(*options.spot > 0.0))
            throw ConfigError("spot", "must be positive");
        best.emplace(0.0, Best{*options.spot, 0});
    }
    if (best.size() < 2)
        throw EmptyCurveError("no option quotes besides the underlying");

    std::vector<double> strikes, asks;
    std::vector<std::int64_t> sizes;
    for (const auto& [k, b] : best) {
        strikes.push_back(k);
        asks.push_back(b.ask);
        sizes.push_back(b.size);
    }
    return QuoteCurve(std::move(strikes), std::move(asks), maturity, options.spot, std::move(sizes), observed);
}

void write_quotes_csv(std::ostream& out, const QuoteCurve& curve) {
    const std::string maturity = curve.maturity().empty() ? "1970-01-01" : curve.maturity();
    const std::string at = curve.observed_at().empty() ? maturity : curve.observed_at();
    out << "strike,ask,ask_size,maturity,observed_at\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        write_double(out, curve.strikes()[i]);
        out << ',';
        write_double(out, curve.asks()[i]);
        out << ',' << curve.ask_sizes()[i] << ',' << maturity << ',' << at << '\n';
    }
}

double max_gap(std::span<const double> positive_strikes) {
    if (positive_strikes.size() < 2)
        throw InsufficientStrikesError("mesh needs at least two positive strikes");
    double m = 0.0;
    for (std::size_t i = 1; i < positive_strikes.size(); ++i)
        m = std::max(m, positive_strikes[i] - positive_strikes[i - 1]);
    return m;
}

MeshStats mesh(const QuoteCurve& curve, const EfficientCurve* efficient) {
    MeshStats stats;
    stats.mesh_all = max_gap(curve.strikes().subspan(1));
    if (efficient)
        stats.mesh_efficient = max_gap(efficient->strikes().subspan(1));
    return stats;
}

Moneyness moneyness_class(double spot, double strike, double rate, double tau, const std::array<double, 4>& edges) {
    const double m = std::exp(rate * tau) * strike / spot;
    if (m < edges[0])
        return Moneyness::dITM;
    if (m < edges[1])
        return Moneyness::ITM;
    if (m < edges[2])
        return Moneyness::ATM;
    if (m <= edges[3])
        return Moneyness::OTM;
    return Moneyness::dOTM;
}

std::string_view to_string(Moneyness m) {
    switch (m) {
    case Moneyness::dITM: return "dITM";
    case Moneyness::ITM: return "ITM";
    case Moneyness::ATM: return "ATM";
    case Moneyness::OTM: return "OTM";
    case Moneyness::dOTM: return "dOTM";
    }
    return "?";
}

} // namespace npcall
