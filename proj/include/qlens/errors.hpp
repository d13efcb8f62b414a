#pragma once

#include <stdexcept>
#include <string>

namespace qlens {

// Base class for all library errors.  Every failure mode the library can
// diagnose is reported through one of the subclasses below so callers can
// distinguish bad input (domain/parse/config) from internal limits
// (overflow, truncation) without string matching.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation
// (e.g. evaluation point outside (0,1), |mu| != 1 for a character).
struct domain_error : error {
    using error::error;
};

// Exponent arithmetic left the machine-integer range.  Exact scalars never
// round, so the only way to lose information is exponent overflow; it is a
// hard error by design.
struct overflow_error : error {
    using error::error;
};

// Expression text rejected by the parser; `pos` is a 0-based offset into
// the input string.
struct parse_error : error {
    std::size_t pos;
    parse_error(std::size_t position, const std::string& what_arg)
        : error(what_arg + " (at offset " + std::to_string(position) + ")"),
          pos(position) {}
};

// Two morphisms whose composition is undefined (source/range mismatch).
struct composition_error : error {
    using error::error;
};

// An operation that requires a homogeneous element was handed layers of
// mixed degree.
struct grading_error : error {
    using error::error;
};

// Truncation parameters cannot represent the requested object
// (window too small, margin at least the level cutoff, ...).
struct truncation_error : error {
    using error::error;
};

// A matrix expected to be Toeplitz within tolerance was not; carries the
// largest deviation seen along a diagonal.
struct toeplitz_error : error {
    double max_deviation;
    toeplitz_error(double dev, const std::string& what_arg)
        : error(what_arg), max_deviation(dev) {}
};

// Trace residues that should be integers failed to round cleanly, or an
// invariant tuple is outside the classified range.
struct invariant_error : error {
    using error::error;
};

// Run configuration violating the documented parameter invariants.
struct config_error : error {
    using error::error;
};

}  // namespace qlens
