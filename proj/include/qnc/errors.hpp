#pragma once
// Error taxonomy shared by the whole library.
//
// Everything derives from qnc::Error (itself a std::runtime_error) so callers can
// catch broadly; the CLI maps the subtypes onto distinct exit codes.

#include <stdexcept>
#include <string>

namespace qnc {

/// Base class of all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data (bad JSON/CSV syntax, wrong field types, ...).
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line = -1, long column = -1)
        : Error(format(what, line, column)), line(line), column(column) {}
    long line;    ///< 1-based line of the offending record, -1 if unknown
    long column;  ///< 1-based column/offset, -1 if unknown

private:
    static std::string format(const std::string& what, long line, long column) {
        std::string s = "parse error";
        if (line >= 0) s += " at line " + std::to_string(line);
        if (column >= 0) s += ", column " + std::to_string(column);
        return s + ": " + what;
    }
};

/// Structurally valid input that violates a domain constraint (negative count, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A criterion mapping needs p(0,0) > 0 but the distribution has no vacuum mass.
class DivisionByVacuum : public Error {
public:
    DivisionByVacuum() : Error("p(0,0) = 0: probability-form criterion undefined") {}
};

/// Index tuple outside the admissible set of its criterion family.
class InvalidIndices : public Error {
public:
    using Error::Error;
};

/// A moment-form evaluation asked for an order the moment table does not hold.
class MissingOrder : public Error {
public:
    using Error::Error;
};

/// Mode estimation on a field without excess (chaotic-like) intensity fluctuations.
class NotChaoticLike : public Error {
public:
    using Error::Error;
};

/// Bootstrap resampling was handed normalized probabilities instead of raw counts.
class NotCounts : public Error {
public:
    using Error::Error;
};

/// The requested working precision cannot resolve an alternating kernel sum.
class PrecisionEscalation : public Error {
public:
    PrecisionEscalation(int n, int m, double s, double modes, int bits)
        : Error("kernel entry (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                ", s=" + std::to_string(s) + ", M=" + std::to_string(modes) +
                ") not resolvable at " + std::to_string(bits) + " bits"),
          n(n), m(m), s(s), modes(modes), bits(bits) {}
    int n, m;
    double s, modes;
    int bits;
};

}  // namespace qnc
