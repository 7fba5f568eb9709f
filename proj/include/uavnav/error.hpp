#pragma once

#include <stdexcept>
#include <string>

namespace uavnav {

// Raised for invalid user-supplied values: bad coordinates, malformed
// scenario parameters, dimension mismatches. The CLI maps these to exit 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised for missing/unreadable/undecodable files and provider failures.
// Also exit 2 at the CLI boundary.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace uavnav
