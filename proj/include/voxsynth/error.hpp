#pragma once

#include <stdexcept>
#include <string>

namespace voxsynth {

/// Bad arguments or inputs that violate an operation's preconditions.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File system or codec failures. The message carries the path and cause.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace voxsynth
