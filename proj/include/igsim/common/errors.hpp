#pragma once

#include <stdexcept>
#include <string>

namespace igsim {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (plans, maps, profiles, rosters).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A record or file that does not match its schema.
class SchemaError : public Error {
public:
    SchemaError(std::string field, const std::string& what)
        : Error(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Input that violates an operation's precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Duplicate keys or broken uniqueness constraints in derived tables.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Estimator failure (singular design, non-convergence, ...).
class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace igsim
