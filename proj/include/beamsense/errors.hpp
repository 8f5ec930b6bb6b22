#pragma once

#include <stdexcept>
#include <string>

namespace beamsense {

// File could not be opened/read/written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data (CSV rows, checkpoint files).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad experiment configuration: unknown key, unparsable value, or a value
// a sub-config rejects.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation called in a state that does not admit it (e.g. stepping a
// finished episode).
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

// A non-finite value was produced where a finite one is required.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace beamsense
