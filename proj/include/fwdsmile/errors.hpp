#pragma once

#include <stdexcept>

namespace fwdsmile {

// Rejected inputs: parameter constraints violated, arguments outside the
// mathematical domain of an operation, or unusable configuration.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Runtime numerical failure: non-convergence, branch-tracking breakdown,
// representable-range exhaustion. Valid inputs, failed computation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fwdsmile
