#pragma once

#include <stdexcept>
#include <string>

namespace enlca {

// Operand shapes are inconsistent with the operation.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A value is non-finite, overflowed, or otherwise numerically unusable.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A serialized matrix or image could not be parsed or written.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A configuration value is outside its documented domain.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace enlca
