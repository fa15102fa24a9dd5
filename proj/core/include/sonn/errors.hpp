#pragma once

#include <stdexcept>
#include <string>

namespace sonn {

/// Tensor extents do not line up (channel counts, shift table length, ...).
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// An argument is outside its admissible range (Q = 0, even kernel, bad model name, ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A file does not conform to its declared format (bad magic, truncation, version).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// The OS refused a read or write.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation produced NaN/Inf where finiteness is part of the contract.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sonn
