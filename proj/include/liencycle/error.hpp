#pragma once

#include <stdexcept>
#include <string>

namespace liencycle {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid system description or CLI/config input.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// F' requested at a point where some term has an unbounded derivative.
class NonDifferentiable : public Error {
public:
    explicit NonDifferentiable(double x)
        : Error("F' is unbounded at x = " + std::to_string(x)), x_(x) {}
    [[nodiscard]] double where() const noexcept { return x_; }

private:
    double x_;
};

/// F does not have the two-positive-zero shape required for beta1 < alpha1 < beta2.
class ShapeMismatch : public Error {
public:
    ShapeMismatch(int zeros_found, const std::string& detail)
        : Error("F has " + std::to_string(zeros_found) +
                " positive simple zero(s) in (0, d); expected 2" +
                (detail.empty() ? std::string{} : " (" + detail + ")")),
          zeros_found_(zeros_found) {}
    [[nodiscard]] int zeros_found() const noexcept { return zeros_found_; }

private:
    int zeros_found_;
};

/// Numerical failure of the integrator or of a downstream computation.
class NumericError : public Error {
public:
    using Error::Error;
};

class StepUnderflow : public NumericError {
public:
    StepUnderflow(double t, double x, double y)
        : NumericError("step size underflow at t = " + std::to_string(t) +
                       ", (x, y) = (" + std::to_string(x) + ", " + std::to_string(y) + ")"),
          t_(t), x_(x), y_(y) {}
    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] double x() const noexcept { return x_; }
    [[nodiscard]] double y() const noexcept { return y_; }

private:
    double t_, x_, y_;
};

class NonClosed : public NumericError {
public:
    using NumericError::NumericError;
};

class BracketInvalid : public NumericError {
public:
    BracketInvalid(double a, int count_low, int count_high)
        : NumericError("cycle-count predicate not monotone on the initial bracket for a = " +
                       std::to_string(a) + " (count at low end " + std::to_string(count_low) +
                       ", at high end " + std::to_string(count_high) + ")"),
          count_low_(count_low), count_high_(count_high) {}
    [[nodiscard]] int count_low() const noexcept { return count_low_; }
    [[nodiscard]] int count_high() const noexcept { return count_high_; }

private:
    int count_low_, count_high_;
};

}  // namespace liencycle
