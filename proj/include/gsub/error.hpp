#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsub {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Bad or missing user input (files, malformed specs, too few samples).
class InputError : public Error {
public:
    using Error::Error;
};

/// A quadrature sum was non-finite: f is not square-integrable enough.
class IntegrabilityError : public Error {
public:
    using Error::Error;
};

/// A distribution or transport concentrated at a point.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// The long-run variance sum does not converge (long memory).
class DivergingSumError : public Error {
public:
    using Error::Error;
};

/// A target covariance lies below the attainability floor gamma.
class AttainabilityError : public Error {
public:
    AttainabilityError(const std::string& what, double gamma, std::vector<std::size_t> lags)
        : Error(what), gamma_(gamma), lags_(std::move(lags)) {}

    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] const std::vector<std::size_t>& lags() const noexcept { return lags_; }

private:
    double gamma_;
    std::vector<std::size_t> lags_;
};

/// A covariance sequence failed the positive semidefiniteness check.
class PsdError : public Error {
public:
    using Error::Error;
};

/// An experiment precondition does not hold (non-summable, no fourth moment).
class RefusalError : public Error {
public:
    using Error::Error;
};

}  // namespace gsub
