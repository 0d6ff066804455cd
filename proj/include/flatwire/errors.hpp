#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace flatwire {

/// Exit-code category used by the command-line tool.
enum class ErrorCategory { config = 2, numerical = 3, io = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}
    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Malformed config text; carries the 1-based line (0 when unknown) and field.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0, std::string field = {})
        : Error(ErrorCategory::config,
                (line > 0 ? "line " + std::to_string(line) + ": " : std::string{}) +
                    (field.empty() ? std::string{} : field + ": ") + what),
          line_(line), field_(std::move(field)) {}
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

struct Violation {
    std::string field;
    std::string message;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(ErrorCategory::config, format(violations)), violations_(std::move(violations)) {}
    ValidationError(std::string field, std::string message)
        : ValidationError(std::vector<Violation>{{std::move(field), std::move(message)}}) {}
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string format(const std::vector<Violation>& vs) {
        std::string out = "invalid input (" + std::to_string(vs.size()) + " violation" +
                          (vs.size() == 1 ? "" : "s") + ")";
        for (const auto& v : vs) out += "\n  " + v.field + ": " + v.message;
        return out;
    }
    std::vector<Violation> violations_;
};

/// Geometry that cannot be evaluated or meshed (zero radial depth, negative clearance).
class GeometryError : public Error {
public:
    explicit GeometryError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

/// Disconnected or otherwise unsolvable reluctance network.
class TopologyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Evaluation outside a tabulated range; nothing is extrapolated.
class RangeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

}  // namespace flatwire
