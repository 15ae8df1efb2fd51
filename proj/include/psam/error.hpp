#pragma once

#include <stdexcept>
#include <string>

namespace psam {

/// Failure categories raised by the library. The CLI maps them to exit codes.
enum class ErrorKind {
    Contract,             ///< a numeric contract (invariant or precondition) was violated
    NotPsd,
    Singular,
    SingularModel,        ///< a correlation model that is not positive definite
    Domain,
    NotComparable,        ///< majorization of vectors with different sums
    InsufficientTraining,
    Config,
    Regime,
    InsufficientSampling,
    Boundary,
    Parse,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by psd_inverse; carries the offending smallest eigenvalue.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(double smallest_eigenvalue, const std::string& what)
        : Error(ErrorKind::Singular, what), smallest_(smallest_eigenvalue) {}

    double smallest_eigenvalue() const noexcept { return smallest_; }

private:
    double smallest_;
};

/// Config-file parse failure. `line` is 1-based, 0 when the error is not tied
/// to a line (for example a missing required key).
class ParseError : public Error {
public:
    ParseError(int line, std::string key, const std::string& what)
        : Error(ErrorKind::Parse, what), line_(line), key_(std::move(key)) {}

    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) throw Error(kind, what);
}

}  // namespace psam
