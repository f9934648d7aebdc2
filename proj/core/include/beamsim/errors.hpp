#pragma once

#include <stdexcept>

namespace beamsim {

// Malformed or incomplete input file; the message carries the location or
// field that failed.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An estimator was asked for more than its input supports (too few curve
// points, no crossing, ...).
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace beamsim
