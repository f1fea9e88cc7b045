#pragma once

#include <stdexcept>
#include <string>

namespace flatlyap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Floating-point result left its valid domain (e.g. a half-plane image with y <= 0).
class NumericalDegeneracy : public Error {
public:
    using Error::Error;
};

/// An iterative procedure exceeded its configured cap.
class NonTermination : public Error {
public:
    using Error::Error;
};

/// A requested computation would exceed a memory or size cap.
class ResourceLimit : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Domain-wall crossing could not be resolved within the refinement budget.
class CrossingLocalizationError : public Error {
public:
    using Error::Error;
};

/// Adaptive step in a cusp fell below dt * 2^-20.
class CuspTrap : public Error {
public:
    using Error::Error;
};

/// Orthonormal frame lost rank during QR propagation.
class DeflationError : public Error {
public:
    DeflationError(const std::string& what, long step) : Error(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

/// A representation generator fails an invertibility or form-preservation check.
class InvariantViolation : public Error {
public:
    InvariantViolation(const std::string& what, int generator, double residual)
        : Error(what + " (generator " + std::to_string(generator) + ", residual " + std::to_string(residual) + ")"),
          generator_(generator), residual_(residual) {}
    int generator() const noexcept { return generator_; }
    double residual() const noexcept { return residual_; }

private:
    int generator_;
    double residual_;
};

/// Configuration rejected by the schema; carries the offending field and line (1-based, 0 if unknown).
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, int line, const std::string& message)
        : Error(format(field, line, message)), field_(field), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& field, int line, const std::string& message) {
        std::string out = "config";
        if (line > 0) out += ":" + std::to_string(line);
        if (!field.empty()) out += ": '" + field + "'";
        return out + ": " + message;
    }

    std::string field_;
    int line_;
};

}  // namespace flatlyap
