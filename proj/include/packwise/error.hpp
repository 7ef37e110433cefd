#pragma once

#include <stdexcept>
#include <string>

namespace packwise {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Clustering produced (or would produce) coincident centroids or zero variance.
class DegenerateModel : public Error {
public:
    using Error::Error;
};

/// Exhaustive search refused because the instance is too large to enumerate.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Offline table construction failed.
class BuildError : public Error {
public:
    using Error::Error;
};

/// A lookup table was used with catalogs other than the ones it was built for.
class FingerprintMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace packwise
