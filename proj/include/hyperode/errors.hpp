#ifndef HYPERODE_ERRORS_HPP
#define HYPERODE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperode {

// Syntax error from the expression parser. Carries the byte offset of the
// offending token and the set of tokens that would have been accepted there.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t offset, std::vector<std::string> expected)
        : std::runtime_error(std::move(message)), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

// Evaluation left the mathematical domain (ln of a non-positive value,
// division by zero, non-finite intermediate, ...).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A point too close to the locus phi^2 = h(x), where the metric degenerates.
class DegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An integrator or quadrature routine failed to reach its target.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An operation's precondition does not hold; the message names the factor.
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hyperode

#endif
