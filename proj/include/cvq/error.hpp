#pragma once

#include <stdexcept>
#include <string>

namespace cvq {

// Raised when a numerical procedure cannot deliver a trustworthy result
// (non-convergence, undersampling, degenerate normalization, saturated frames).
// Precondition violations use std::invalid_argument instead.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cvq
