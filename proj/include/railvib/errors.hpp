#pragma once

#include <stdexcept>
#include <string>

namespace railvib {

// Malformed bytes: unreadable file, wrong header, a field that does not parse.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed input that breaks a domain invariant (non-increasing timestamps,
// empty trace, degenerate geometry, out-of-range parameter, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failure while writing output.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace railvib
