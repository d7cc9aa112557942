#pragma once

#include <stdexcept>
#include <string>

namespace screw_grasp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidRotation : public Error {
public:
    using Error::Error;
};

class DegenerateWrench : public Error {
public:
    using Error::Error;
};

class InvalidScrew : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised when a GraspProblem cannot be turned into a conic program.
class CompileError : public Error {
public:
    using Error::Error;
};

/// NaN or Inf found in solver input.
class DataError : public Error {
public:
    using Error::Error;
};

class UnsupportedProgram : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Scenario file violates the schema. `field()` holds the JSON path of the offending value.
class SchemaError : public Error {
public:
    SchemaError(std::string field, const std::string& reason)
        : Error(field + ": " + reason), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Well-formed input describing a physically meaningless system (mu <= 0, inverted bounds, ...).
class PhysicalInvariantError : public Error {
public:
    PhysicalInvariantError(std::string field, const std::string& reason)
        : Error(field + ": " + reason), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class VersionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace screw_grasp
