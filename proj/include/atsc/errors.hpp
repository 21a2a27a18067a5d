#pragma once

#include <stdexcept>
#include <string>

namespace atsc {

// Malformed scenario/config input. The message names the offending element.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad argument to an operation (out-of-range index, non-positive parameter, ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Tensor/layer shape mismatch. The message names the layer and both shapes.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File format problems (CSV schema, checkpoint magic/version, ...).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace atsc
