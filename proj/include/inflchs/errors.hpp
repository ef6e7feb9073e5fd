#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace inflchs {

// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// An input that violates a documented contract (e.g. a non-Hermitian
// generator handed to a unitary step).
class ContractViolation : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class BuildError : public Error {
public:
    using Error::Error;
};

class PropagationError : public Error {
public:
    PropagationError(const std::string& what, double time, std::ptrdiff_t term = -1)
        : Error(what), time_(time), term_(term) {}
    double time() const noexcept { return time_; }
    // Plan index of the failing term, or -1 when not inside a plan sum.
    std::ptrdiff_t term() const noexcept { return term_; }

private:
    double time_;
    std::ptrdiff_t term_;
};

// Configuration error; `pointer` is a JSON pointer to the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string pointer, const std::string& message)
        : Error(pointer + ": " + message), pointer_(std::move(pointer)) {}
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

// Failure to read or write a file.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace inflchs
