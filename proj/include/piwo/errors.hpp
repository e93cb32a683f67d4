#pragma once

#include <stdexcept>
#include <string>

namespace piwo {

/// Malformed instance, policy or sweep configuration (missing rows, bad
/// normalization, folds too small).
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A scalar argument outside its documented range.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data violating a record-level invariant, or an unparsable file.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace piwo
