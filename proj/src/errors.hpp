#pragma once

#include <stdexcept>
#include <string>

namespace storval {

// Malformed user input: bad dimensions, out-of-range parameters, invalid
// probability distributions.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// File or text that does not follow one of the storval-* schemas.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, int line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

class SingularMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Simplex failure (cycling guard, numerical breakdown) or a dispatch LP that
// did not reach optimality.
class LpFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A support point sits on (or within the probe step of) a boundary between
// two dual regimes, so its price vector is not uniquely defined.
class BoundaryPoint : public std::runtime_error {
public:
    BoundaryPoint(const std::string& what, long node, int coordinate)
        : std::runtime_error(what), node_(node), coordinate_(coordinate) {}

    long node() const noexcept { return node_; }
    int coordinate() const noexcept { return coordinate_; }

private:
    long node_;
    int coordinate_;
};

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A structural claim that must hold under the model assumptions was violated
// (for example a price outside {alpha, beta} on an acyclic homogeneous network).
class StructuralViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace storval
