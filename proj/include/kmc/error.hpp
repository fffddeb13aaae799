#pragma once

#include <stdexcept>
#include <string>

namespace kmc {

/// Raised for invalid input, malformed files and violated preconditions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A saved pipeline was written by an incompatible format version.
class VersionError : public Error {
public:
    using Error::Error;
};

}  // namespace kmc
