#pragma once

#include <stdexcept>
#include <string>

namespace exlab {

/// A precondition on an argument was violated.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A statistical routine did not receive enough samples to be meaningful.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two pieces of derived data disagree in a way the construction rules out.
class InternalInconsistency : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A computation produced a non-finite or otherwise unusable number.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace exlab
