#pragma once

#include <stdexcept>
#include <string>

namespace divstat {

// Domain/validation failures: bad values, malformed rows, broken invariants.
// Maps to CLI exit code 1.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem and stream failures. Maps to CLI exit code 2.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace divstat
