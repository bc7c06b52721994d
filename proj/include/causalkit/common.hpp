#pragma once

#include <stdexcept>
#include <string>

namespace causalkit {

// Input that violates a documented precondition (unknown label, overlapping
// sets, malformed file, ...). CLI maps this to exit code 2.
struct invalid_input : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Work would exceed a desk-scale budget (SGS node cap, equivalence-class
// enumeration cap, ...). CLI maps this to exit code 3.
struct budget_exceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace causalkit
