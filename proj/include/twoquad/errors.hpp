#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace twoquad {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct PreconditionViolation : Error {
    using Error::Error;
};

/// The pair is not smooth: det(Q0) = 0 or det(lambda Q0 + Q1) has a repeated root.
struct HypothesisViolation : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line_, std::size_t column_)
        : Error(what + " at line " + std::to_string(line_) + ", column " + std::to_string(column_)),
          line(line_), column(column_) {}
    std::size_t line;
    std::size_t column;
};

/// Raised by a fixed-precision attempt when a ball decision could not be certified.
/// Precision drivers catch it and retry with more bits.
struct InsufficientPrecision : Error {
    using Error::Error;
};

struct PrecisionExhausted : Error {
    PrecisionExhausted(const std::string& what, long bits_)
        : Error(what + " (precision cap " + std::to_string(bits_) + " bits)"), bits(bits_) {}
    long bits;
};

struct BallDivisionByZero : Error {
    BallDivisionByZero() : Error("ball division by a ball containing zero") {}
};

struct NegativeSqrt : Error {
    NegativeSqrt() : Error("square root of a certified negative ball") {}
};

struct OracleBudgetExhausted : Error {
    OracleBudgetExhausted(const std::string& what, long searched_bound_, std::uint64_t nodes_)
        : Error(what), searched_bound(searched_bound_), nodes(nodes_) {}
    long searched_bound;
    std::uint64_t nodes;
};

/// The external solver failed, answered FAIL, or sent something unparsable.
struct OracleFailure : Error {
    OracleFailure(const std::string& what, std::string stderr_text_ = {})
        : Error(what), stderr_text(std::move(stderr_text_)) {}
    std::string stderr_text;
};

/// An oracle answer did not pass exact verification.
struct VerificationFailure : Error {
    using Error::Error;
};

/// No nonzero real common zero exists. The witness lambda makes lambda Q0 + Q1 definite.
struct RealInsolvable : Error {
    RealInsolvable(const mpq_class& witness_, int r_, int s_)
        : Error("real-insolvable: lambda = " + witness_.get_str() + " gives a definite pencil member"),
          witness(witness_), r(r_), s(s_) {}
    mpq_class witness;
    int r;
    int s;
};

/// The instance generator gave up before finding an instance with the requested properties.
struct RejectionCapExceeded : Error {
    using Error::Error;
};

struct InternalError : Error {
    using Error::Error;
};

}  // namespace twoquad
