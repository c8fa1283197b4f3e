#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace debiaskit {

using Vector = Eigen::VectorXd;
// Row-major so that a word vector or a basis direction is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Base of every error the library throws. Callers that only need to report
// failures can catch this; the subclasses exist for tests and exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file or document does not follow its declared format/schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inputs are well-formed but violate a precondition (too few words, bad k, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace debiaskit
