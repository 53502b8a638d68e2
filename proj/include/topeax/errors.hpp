#ifndef TOPEAX_ERRORS_HPP
#define TOPEAX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace topeax {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: missing files, malformed formats, invalid configuration.
// The CLI maps this to exit code 2.
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

// Numerical failure on well-formed input: degenerate geometry, failed
// perplexity calibration, featureless density landscapes. CLI exit code 3.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace topeax

#endif  // TOPEAX_ERRORS_HPP
