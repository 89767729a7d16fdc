#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace npcall {

// Base of every library error. code() is a stable machine-readable tag used
// by the CLI error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("parse_error", "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct MissingNumeraireError : Error {
    explicit MissingNumeraireError(const std::string& what) : Error("missing_numeraire", what) {}
};

struct EmptyCurveError : Error {
    explicit EmptyCurveError(const std::string& what) : Error("empty_curve", what) {}
};

struct InsufficientStrikesError : Error {
    explicit InsufficientStrikesError(const std::string& what) : Error("insufficient_strikes", what) {}
};

struct InvalidCurveError : Error {
    explicit InvalidCurveError(const std::string& what) : Error("invalid_curve", what) {}
};

struct InconsistentCurveError : Error {
    explicit InconsistentCurveError(const std::string& what) : Error("inconsistent_curve", what) {}
};

struct NotInGammaError : Error {
    explicit NotInGammaError(const std::string& what) : Error("not_in_gamma", what) {}
};

struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& what) : Error("infeasible", what) {}
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, int iterations)
        : Error("solver_error", what + " (after " + std::to_string(iterations) + " iterations)"),
          iterations_(iterations) {}
    int iterations() const noexcept { return iterations_; }

private:
    int iterations_;
};

class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error("config_error", field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct NoSolutionError : Error {
    explicit NoSolutionError(const std::string& what) : Error("no_solution", what) {}
};

struct DegenerateMeasureError : Error {
    explicit DegenerateMeasureError(const std::string& what) : Error("degenerate_measure", what) {}
};

} // namespace npcall
