#pragma once

#include <stdexcept>
#include <string>

namespace msheet {

// Invalid configuration, arguments, or invariant violations. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing or malformed runtime data (files, artifacts). CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace msheet
