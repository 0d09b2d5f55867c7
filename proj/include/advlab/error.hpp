#pragma once

#include <stdexcept>
#include <string>

namespace advlab {

// Error categories. The CLI maps each to a distinct exit code.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Incompatible tensor/image shapes. Reported as a parameter error.
class ShapeError : public ParameterError {
public:
    explicit ShapeError(const std::string& what) : ParameterError(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file contents. Reported as an I/O error.
class FormatError : public IoError {
public:
    explicit FormatError(const std::string& what) : IoError(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace advlab
