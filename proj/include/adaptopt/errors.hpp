#pragma once

#include <stdexcept>
#include <string>

namespace adaptopt {

/// Malformed or inconsistent experiment configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite loss, gradient, or parameters during training. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or written. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}    // namespace adaptopt
