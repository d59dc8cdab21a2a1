#pragma once

#include <stdexcept>
#include <string>

namespace dnspectral {

/// Categories of failure raised by the library. The CLI maps each one to a
/// distinct process exit code (see `exit_code`).
enum class ErrorKind {
    domain,             // argument outside the mathematical domain
    unsupported_range,  // valid input the evaluator does not cover
    accuracy,           // quadrature or refinement failed to converge
    configuration,      // inconsistent problem or grid setup
    degenerate_horizon, // vanishing denominator in source recovery
    oracle,             // reference solver failure (instability)
    parse,              // expression / config / CSV syntax
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::unsupported_range: return "unsupported_range";
    case ErrorKind::accuracy: return "accuracy";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::degenerate_horizon: return "degenerate_horizon";
    case ErrorKind::oracle: return "oracle";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

/// Process exit code for an error kind. 0 is success and 2 is reserved for a
/// failed tolerance verdict in `verify` mode.
inline int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::parse: return 3;
    case ErrorKind::configuration: return 4;
    case ErrorKind::io: return 5;
    case ErrorKind::domain: return 6;
    case ErrorKind::unsupported_range: return 7;
    case ErrorKind::accuracy: return 8;
    case ErrorKind::degenerate_horizon: return 9;
    case ErrorKind::oracle: return 10;
    }
    return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

} // namespace dnspectral
